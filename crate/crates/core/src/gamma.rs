//! The `Γ_{α,Y}(z)` matrix, its poles on the positive imaginary axis, and the
//! invertibility scan along `z ≥ 0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::config::{distance, InteractionConfig, Point3};
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Bisection tolerance on `λ`.
pub const POLE_TOL: f64 = 1e-12;
/// Default threshold on the smallest singular value in the assumption scan.
pub const ASSUMPTION1_THRESHOLD: f64 = 1e-6;
/// `‖Γ(z)⁻¹‖` above which `z` is treated as a pole.
pub const AT_POLE_NORM: f64 = 1e12;

/// `G̃_z(x)` as a function of `|x|`: zero at the origin.
pub fn green_tilde(z: C64, r: f64) -> C64 {
    if r == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        (I * z * r).exp() / (4.0 * PI * r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    pub z: C64,
    /// Active (finite-strength) centers, in the row order of `entries`.
    pub centers: Vec<Point3>,
    pub strengths: Vec<f64>,
    pub entries: DMatrix<C64>,
}

impl GammaMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn determinant(&self) -> C64 {
        if self.dim() == 0 {
            return C64::new(1.0, 0.0);
        }
        self.entries.clone().lu().determinant()
    }

    pub fn inverse(&self) -> Result<DMatrix<C64>> {
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .ok_or(Error::AtPole(self.z, f64::INFINITY))?;
        let norm = inv.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > AT_POLE_NORM {
            return Err(Error::AtPole(self.z, norm));
        }
        Ok(inv)
    }

    pub fn min_singular_value(&self) -> f64 {
        if self.dim() == 0 {
            return f64::INFINITY;
        }
        self.entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `[Γ_{α,Y}(z)]_{jl} = (α_j − iz/4π)δ_{jl} − G̃_z(y_j − y_l)` over the active centers.
pub fn build_gamma(cfg: &InteractionConfig, z: C64) -> Result<GammaMatrix> {
    if z.im < 0.0 {
        return Err(Error::InvalidArgument(format!("Im z must be >= 0, got {z}")));
    }
    let (centers, strengths) = cfg.active();
    let n = centers.len();
    let entries = DMatrix::from_fn(n, n, |j, l| {
        if j == l {
            C64::new(strengths[j], 0.0) - I * z / (4.0 * PI)
        } else {
            -green_tilde(z, distance(&centers[j], &centers[l]))
        }
    });
    Ok(GammaMatrix {
        z,
        centers,
        strengths,
        entries,
    })
}

/// `Γ(iλ)`, which is real symmetric.
fn gamma_imaginary_axis(centers: &[Point3], strengths: &[f64], lambda: f64) -> DMatrix<f64> {
    let n = centers.len();
    DMatrix::from_fn(n, n, |j, l| {
        if j == l {
            strengths[j] + lambda / (4.0 * PI)
        } else {
            let d = distance(&centers[j], &centers[l]);
            -(-lambda * d).exp() / (4.0 * PI * d)
        }
    })
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pole {
    /// The pole sits at `z = iλ`.
    pub lambda: f64,
    pub multiplicity: usize,
}

impl Pole {
    pub fn eigenvalue(&self) -> f64 {
        -self.lambda * self.lambda
    }
}

/// Beyond this `λ` the diagonal dominates and `Γ(iλ)` has no kernel.
pub fn default_lambda_max(cfg: &InteractionConfig) -> f64 {
    let (_, a) = cfg.active();
    let amax = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let spread = cfg.min_pairwise_distance().map_or(10.0, |d| 10.0 / d);
    4.0 * PI * amax + spread
}

/// All `λ ∈ (0, λ_max]` with `Γ(iλ)` singular, with multiplicities.
///
/// Along `z = iλ` the eigenvalues of `Γ` are strictly increasing in `λ`
/// (`dΓ/dλ = (I + E)/4π` with `E_{jl} = e^{−λ|y_j−y_l|}` positive definite),
/// so the `k`-th sorted eigenvalue crosses zero at most once and can be
/// bisected on directly. Degenerate crossings are therefore found even when
/// the determinant does not change sign.
pub fn find_poles(cfg: &InteractionConfig, lambda_max: f64) -> Result<Vec<Pole>> {
    find_poles_with_cells(cfg, lambda_max, 512)
}

pub fn find_poles_with_cells(cfg: &InteractionConfig, lambda_max: f64, cells: usize) -> Result<Vec<Pole>> {
    if !(lambda_max > 0.0) {
        return Err(Error::NonPositiveRange(lambda_max));
    }
    let (centers, strengths) = cfg.active();
    if centers.is_empty() {
        return Ok(Vec::new());
    }
    let eig = |lam: f64| sorted_eigenvalues(gamma_imaginary_axis(&centers, &strengths, lam));
    let negatives = |ev: &[f64]| ev.iter().filter(|&&m| m < 0.0).count();

    let mut roots = Vec::new();
    let step = lambda_max / cells as f64;
    let mut lo = 0.0;
    let mut n_lo = negatives(&eig(lo));
    for c in 1..=cells {
        if n_lo == 0 {
            break;
        }
        let hi = step * c as f64;
        let n_hi = negatives(&eig(hi));
        // Eigenvalues with sorted index n_hi..n_lo cross zero in (lo, hi].
        for k in n_hi..n_lo {
            let (mut a, mut b) = (lo, hi);
            while b - a > POLE_TOL {
                let m = 0.5 * (a + b);
                if eig(m)[k] < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        n_lo = n_hi;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut poles: Vec<Pole> = Vec::new();
    for r in roots {
        match poles.last_mut() {
            Some(p) if (r - p.lambda).abs() < 1e3 * POLE_TOL => p.multiplicity += 1,
            _ => poles.push(Pole {
                lambda: r,
                multiplicity: 1,
            }),
        }
    }
    Ok(poles)
}

/// Dimension of the numerical kernel of `Γ(iλ)`: eigenvalues below `10⁻⁸‖Γ‖`.
pub fn kernel_dimension(cfg: &InteractionConfig, lambda: f64) -> usize {
    let (centers, strengths) = cfg.active();
    let m = gamma_imaginary_axis(&centers, &strengths, lambda);
    let scale = m.norm().max(1.0);
    sorted_eigenvalues(m).iter().filter(|v| v.abs() < 1e-8 * scale).count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionScan {
    /// `(z, σ_min(Γ(z)))` samples on `[0, z_max]`.
    pub profile: Vec<(f64, f64)>,
    pub min_singular_value: f64,
    pub threshold: f64,
    pub assumption1_ok: bool,
}

/// Smallest singular value of `Γ(z)` sampled on `z ∈ [0, z_max]`.
pub fn assumption1_scan(cfg: &InteractionConfig, z_max: f64, samples: usize, threshold: f64) -> Result<AssumptionScan> {
    if !(z_max > 0.0) {
        return Err(Error::NonPositiveRange(z_max));
    }
    let samples = samples.max(2);
    let mut profile = Vec::with_capacity(samples);
    for k in 0..samples {
        let z = z_max * k as f64 / (samples - 1) as f64;
        let s = build_gamma(cfg, C64::new(z, 0.0))?.min_singular_value();
        profile.push((z, s));
    }
    let min = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(AssumptionScan {
        profile,
        min_singular_value: min,
        threshold,
        assumption1_ok: min > threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub poles: Vec<Pole>,
    pub eigenvalues: Vec<f64>,
    pub scan: AssumptionScan,
}

pub fn spectral_report(cfg: &InteractionConfig, lambda_max: f64, z_max: f64, samples: usize, threshold: f64) -> Result<SpectralReport> {
    let poles = find_poles(cfg, lambda_max)?;
    let eigenvalues = poles
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.eigenvalue(), p.multiplicity))
        .collect();
    let scan = assumption1_scan(cfg, z_max, samples, threshold)?;
    Ok(SpectralReport {
        poles,
        eigenvalues,
        scan,
    })
}

/// `ψ_α(r) = √(−2α) e^{4παr}/r`, the normalized eigenfunction for `α < 0`.
pub fn bound_state_value(alpha: f64, r: f64) -> f64 {
    (-2.0 * alpha).sqrt() * (4.0 * PI * alpha * r).exp() / r
}

pub fn bound_state_n1(alpha: f64, grid: &RadialGrid) -> Result<RadialFunction> {
    if alpha >= 0.0 {
        return Err(Error::PositiveAlpha(alpha));
    }
    Ok(RadialFunction::from_real_fn(grid, |r| bound_state_value(alpha, r)))
}
