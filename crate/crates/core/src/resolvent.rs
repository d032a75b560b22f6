//! Green kernels, the rank-N perturbed resolvent, domain elements of
//! `H_{α,Y}` and the near-center (Bethe–Peierls) expansion.
//!
//! Two representations of test functions are supported. [`RadialSum`] is a
//! finite sum of radial profiles about arbitrary centers; the free resolvent
//! maps such a sum to another one through an exact half-line reduction, so
//! identities between resolvents can be checked to near machine precision.
//! [`Field3D`] boxes go through direct 3D quadrature with the `1/r`
//! singularity of the kernel integrated analytically over the self cell.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{distance, InteractionConfig, Point3};
use crate::error::{Error, Result};
use crate::gamma::{build_gamma, green_tilde};
use crate::grid::{Field3D, ScalarField};
use crate::quadrature::{gl8, push_panel};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// `G_z(x) = e^{iz|x|}/(4π|x|)`.
pub fn green_kernel(z: C64, x: &Point3) -> Result<C64> {
    let r = distance(x, &[0.0; 3]);
    if r == 0.0 {
        return Err(Error::Origin);
    }
    Ok(green_tilde(z, r))
}

/// A radial profile `v(s)`, `s ≥ 0`, about some center.
pub trait RadialProfile: Send + Sync {
    fn eval(&self, s: f64) -> C64;
    /// Radius beyond which the profile is negligible (below ~1e-16 relative).
    fn extent(&self) -> f64;
}

/// `amp · e^{−s²/width²}`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianProfile {
    pub amp: C64,
    pub width: f64,
}

impl RadialProfile for GaussianProfile {
    fn eval(&self, s: f64) -> C64 {
        self.amp * (-(s / self.width).powi(2)).exp()
    }
    fn extent(&self) -> f64 {
        6.5 * self.width
    }
}

/// `G_z(s) = e^{izs}/(4πs)`, infinite at `s = 0`.
#[derive(Debug, Clone, Copy)]
pub struct GreenProfile {
    pub z: C64,
}

impl RadialProfile for GreenProfile {
    fn eval(&self, s: f64) -> C64 {
        (I * self.z * s).exp() / (4.0 * PI * s)
    }
    fn extent(&self) -> f64 {
        37.0 / self.z.im.max(1e-3)
    }
}

/// `R₀(z)v` for a radial source `v`, as a radial profile about the same center.
///
/// With `κ = −iz` (`Re κ > 0`) and `u(s) = s·(R₀v)(s)`, the half-line Dirichlet
/// Green function gives
/// `u(s) = (1/2κ)[A(s) + B(s) − e^{−κs} B(0)]`,
/// `A(s) = ∫_0^s ρv e^{−κ(s−ρ)} dρ`, `B(s) = ∫_s^∞ ρv e^{−κ(ρ−s)} dρ`.
/// `A` and `B` are accumulated panel by panel so that no growing exponential
/// is ever formed.
pub struct FreeResolventProfile {
    kappa: C64,
    source: Arc<dyn RadialProfile>,
    breaks: Vec<f64>,
    a_cum: Vec<C64>,
    b_cum: Vec<C64>,
    extent: f64,
}

/// Width of the accumulation panels.
const SWEEP_PANEL: f64 = 0.125;

impl FreeResolventProfile {
    pub fn new(z: C64, source: Arc<dyn RadialProfile>) -> Self {
        let kappa = -I * z;
        assert!(kappa.re > 0.0, "free resolvent needs Im z > 0");
        let rho_max = source.extent();
        let n = ((rho_max / SWEEP_PANEL).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=n).map(|k| rho_max * k as f64 / n as f64).collect();
        let mut a_cum = vec![ZERO; n + 1];
        for k in 0..n {
            let (lo, hi) = (breaks[k], breaks[k + 1]);
            a_cum[k + 1] = (-kappa * (hi - lo)).exp() * a_cum[k]
                + panel_integral(lo, hi, |r| r * source.eval(r) * (-kappa * (hi - r)).exp());
        }
        let mut b_cum = vec![ZERO; n + 1];
        for k in (0..n).rev() {
            let (lo, hi) = (breaks[k], breaks[k + 1]);
            b_cum[k] = (-kappa * (hi - lo)).exp() * b_cum[k + 1]
                + panel_integral(lo, hi, |r| r * source.eval(r) * (-kappa * (r - lo)).exp());
        }
        let extent = rho_max + 37.0 / kappa.re;
        FreeResolventProfile {
            kappa,
            source,
            breaks,
            a_cum,
            b_cum,
            extent,
        }
    }

    fn sweeps(&self, s: f64) -> (C64, C64) {
        let k = self.kappa;
        let last = self.breaks.len() - 1;
        if s >= self.breaks[last] {
            let a = (-k * (s - self.breaks[last])).exp() * self.a_cum[last];
            return (a, ZERO);
        }
        let p = self.breaks.partition_point(|&b| b <= s).saturating_sub(1).min(last - 1);
        let (lo, hi) = (self.breaks[p], self.breaks[p + 1]);
        let src = &self.source;
        let a = (-k * (s - lo)).exp() * self.a_cum[p]
            + panel_integral(lo, s, |r| r * src.eval(r) * (-k * (s - r)).exp());
        let b = (-k * (hi - s)).exp() * self.b_cum[p + 1]
            + panel_integral(s, hi, |r| r * src.eval(r) * (-k * (r - s)).exp());
        (a, b)
    }
}

impl RadialProfile for FreeResolventProfile {
    fn eval(&self, s: f64) -> C64 {
        if s < 1e-9 {
            // u'(0) = B(0).
            return self.b_cum[0];
        }
        let (a, b) = self.sweeps(s);
        (a + b - (-self.kappa * s).exp() * self.b_cum[0]) / (2.0 * self.kappa * s)
    }
    fn extent(&self) -> f64 {
        self.extent
    }
}

fn panel_integral(a: f64, b: f64, f: impl Fn(f64) -> C64) -> C64 {
    if b <= a {
        return ZERO;
    }
    let (x, w) = gl8();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(|(xi, wi)| f(mid + half * xi) * (half * wi)).sum()
}

/// One term `coeff · v(|x − center|)` of a [`RadialSum`].
#[derive(Clone)]
pub struct RadialTerm {
    pub center: Point3,
    pub coeff: C64,
    pub profile: Arc<dyn RadialProfile>,
}

/// Finite sum of radial profiles about arbitrary centers.
#[derive(Clone, Default)]
pub struct RadialSum {
    pub terms: Vec<RadialTerm>,
}

impl RadialSum {
    pub fn gaussian(center: Point3, amp: C64, width: f64) -> Self {
        RadialSum {
            terms: vec![RadialTerm {
                center,
                coeff: C64::new(1.0, 0.0),
                profile: Arc::new(GaussianProfile { amp, width }),
            }],
        }
    }

    pub fn push(&mut self, center: Point3, coeff: C64, profile: Arc<dyn RadialProfile>) {
        self.terms.push(RadialTerm { center, coeff, profile });
    }

    pub fn extend(&mut self, other: RadialSum) {
        self.terms.extend(other.terms);
    }

    pub fn scaled(mut self, c: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn sample(&self, like: &Field3D) -> Field3D {
        like.like(|x| self.eval(x))
    }
}

impl ScalarField for RadialSum {
    fn eval(&self, x: &Point3) -> C64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.profile.eval(distance(x, &t.center)))
            .sum()
    }
}

/// `R₀(z) f` term by term.
pub fn apply_free_resolvent(z: C64, f: &RadialSum) -> RadialSum {
    RadialSum {
        terms: f
            .terms
            .iter()
            .map(|t| RadialTerm {
                center: t.center,
                coeff: t.coeff,
                profile: Arc::new(FreeResolventProfile::new(z, t.profile.clone())),
            })
            .collect(),
    }
}

/// Coefficients `Σ_k (Γ(z)⁻¹)_{jk} ⟨G_z^{y_k}, f⟩` of the rank-N correction.
///
/// The pairing is `⟨G_z^{y_k}, f⟩ = ∫ G_z(y − y_k) f(y) dy` with no complex
/// conjugation on either factor; that is the convention under which the
/// resolvent identity holds for complex `z`.
pub fn correction_charges(cfg: &InteractionConfig, z: C64, pairings: &[C64]) -> Result<(Vec<Point3>, Vec<C64>)> {
    let gamma = build_gamma(cfg, z)?;
    let inv = gamma.inverse()?;
    let m = DVector::from_column_slice(pairings);
    let q = inv * m;
    Ok((gamma.centers, q.iter().cloned().collect()))
}

/// `R(z) f = R₀f + Σ_{jk} (Γ(z)⁻¹)_{jk} G_z^{y_j} ⟨G_z^{y_k}, f⟩` on a radial sum.
pub fn apply_perturbed_resolvent_sum(cfg: &InteractionConfig, z: C64, f: &RadialSum) -> Result<RadialSum> {
    let free = apply_free_resolvent(z, f);
    let (centers, _) = cfg.active();
    // (R₀f)(y_k) = ∫ G_z(y_k − y) f(y) dy.
    let pairings: Vec<C64> = centers.iter().map(|y| free.eval(y)).collect();
    let (centers, q) = correction_charges(cfg, z, &pairings)?;
    let mut out = free;
    for (y, qj) in centers.iter().zip(q) {
        out.push(*y, qj, Arc::new(GreenProfile { z }));
    }
    Ok(out)
}

/// Relative L² residual of `(R(z₁) − R(z₂))f − (z₁² − z₂²) R(z₁)R(z₂) f`,
/// sampled on the cube `[-half, half]³` with `n` nodes per side.
pub fn resolvent_identity_residual(
    cfg: &InteractionConfig,
    z1: C64,
    z2: C64,
    f: &RadialSum,
    half: f64,
    n: usize,
) -> Result<f64> {
    let r1 = apply_perturbed_resolvent_sum(cfg, z1, f)?;
    let r2 = apply_perturbed_resolvent_sum(cfg, z2, f)?;
    let r12 = apply_perturbed_resolvent_sum(cfg, z1, &r2)?;
    let c = z1 * z1 - z2 * z2;
    let probe = Field3D::cube(half, n, |_| ZERO);
    let resid = probe.like(|x| r1.eval(x) - r2.eval(x) - c * r12.eval(x));
    let norm_f = f.sample(&probe).l2_norm();
    if norm_f == 0.0 {
        return Err(Error::InvalidArgument("f vanishes on the probe box".into()));
    }
    Ok(resid.l2_norm() / norm_f)
}

/// One seeded `(f, z₁, z₂)` draw for the resolvent identity.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub seed: u64,
    pub index: usize,
    pub z1: C64,
    pub z2: C64,
    pub center: Point3,
    pub width: f64,
    pub residual: f64,
}

/// Probe box used by [`resolvent_identity_checks`].
pub const IDENTITY_BOX: (f64, usize) = (5.0, 32);

/// `count` draws of a Gaussian `f` (center in `[-1, 1]³`, width in
/// `[0.5, 1.5]`, complex amplitude) and `z₁, z₂` with `Re z ∈ [-1, 1]`,
/// `Im z ∈ [0.5, 3]`, each with its identity residual.
pub fn resolvent_identity_checks(cfg: &InteractionConfig, seed: u64, count: usize) -> Result<Vec<IdentityCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut z = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(0.5..3.0));
        let (z1, z2) = (z(), z());
        let center = [0; 3].map(|_| rng.random_range(-1.0..1.0));
        let amp = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let width = rng.random_range(0.5..1.5);
        let f = RadialSum::gaussian(center, amp, width);
        let residual = resolvent_identity_residual(cfg, z1, z2, &f, IDENTITY_BOX.0, IDENTITY_BOX.1)?;
        out.push(IdentityCheck {
            seed,
            index,
            z1,
            z2,
            center,
            width,
            residual,
        });
    }
    Ok(out)
}

/// `∫_{[-1/2,1/2]³} |x|⁻¹ d³x`, by splitting the cube into six pyramids.
fn unit_cube_inverse_distance() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        // 3a²S with a = 1/2 and S = ∫∫_{[-1,1]²} (1 + u² + v²)^{-1/2}.
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for k in 0..16 {
            let a = -1.0 + 2.0 * k as f64 / 16.0;
            push_panel(a, a + 0.125, &mut nodes, &mut weights);
        }
        let mut s = 0.0;
        for (u, wu) in nodes.iter().zip(&weights) {
            for (v, wv) in nodes.iter().zip(&weights) {
                s += wu * wv / (1.0 + u * u + v * v).sqrt();
            }
        }
        0.75 * s
    })
}

/// `∫ G_z(x − y) f(y) dy` over the box, with the `1/(4π|x−y|)` part of the
/// cell containing `x` integrated analytically.
pub fn box_green_convolution(z: C64, f: &Field3D, x: &Point3) -> C64 {
    let h3 = f.cell_volume();
    let self_cell = unit_cube_inverse_distance() * f.h * f.h / (4.0 * PI);
    let mut acc = ZERO;
    let mut nearest: Option<(f64, C64)> = None;
    for (idx, v) in f.values.iter().enumerate() {
        let y = f.point(idx);
        let r = distance(x, &y);
        if r < 0.5 * f.h {
            nearest = Some((r, *v));
            // Smooth remainder G_z − G_0 → iz/4π at r = 0.
            let smooth = if r == 0.0 {
                I * z / (4.0 * PI)
            } else {
                ((I * z * r).exp() - 1.0) / (4.0 * PI * r)
            };
            acc += smooth * v * h3;
        } else {
            acc += (I * z * r).exp() / (4.0 * PI * r) * v * h3;
        }
    }
    if let Some((_, v)) = nearest {
        acc += v * self_cell;
    }
    acc
}

/// `R(z)f` sampled on the box of `f`, via direct 3D quadrature. Cost is
/// quadratic in the number of box nodes.
pub fn apply_perturbed_resolvent(cfg: &InteractionConfig, z: C64, f: &Field3D) -> Result<Field3D> {
    if z.im <= 0.0 {
        return Err(Error::InvalidArgument("resolvent needs Im z > 0".into()));
    }
    let (centers, _) = cfg.active();
    let pairings: Vec<C64> = centers.iter().map(|y| box_green_convolution(z, f, y)).collect();
    let (centers, q) = correction_charges(cfg, z, &pairings)?;
    let mut out = f.like(|_| ZERO);
    for idx in 0..out.len() {
        let x = out.point(idx);
        let mut v = box_green_convolution(z, f, &x);
        for (y, qj) in centers.iter().zip(&q) {
            v += qj * green_tilde(z, distance(&x, y));
        }
        out.values[idx] = v;
    }
    Ok(out)
}

/// `ψ = φ_z + Σ_j q_j G_z(· − y_j)` with `q = Γ(z)⁻¹ [φ_z(y_l)]_l`.
#[derive(Clone)]
pub struct DomainElement {
    pub z: C64,
    pub centers: Vec<Point3>,
    pub regular: Arc<dyn ScalarField>,
    pub charges: Vec<C64>,
}

pub fn build_domain_element(cfg: &InteractionConfig, z: C64, regular: Arc<dyn ScalarField>) -> Result<DomainElement> {
    if z.im <= 0.0 {
        return Err(Error::InvalidArgument("domain decomposition needs Im z > 0".into()));
    }
    let gamma = build_gamma(cfg, z)?;
    let inv = gamma.inverse()?;
    let at_centers = DVector::from_iterator(gamma.centers.len(), gamma.centers.iter().map(|y| regular.eval(y)));
    let q = inv * at_centers;
    Ok(DomainElement {
        z,
        centers: gamma.centers,
        regular,
        charges: q.iter().cloned().collect(),
    })
}

impl DomainElement {
    /// `ψ(x)`; infinite at centers carrying a nonzero charge.
    pub fn psi(&self, x: &Point3) -> C64 {
        let mut v = self.regular.eval(x);
        for (y, q) in self.centers.iter().zip(&self.charges) {
            if *q != ZERO {
                v += q * (I * self.z * distance(x, y)).exp() / (4.0 * PI * distance(x, y));
            }
        }
        v
    }

    /// The same `ψ` decomposed at another spectral parameter.
    ///
    /// The new regular part is `φ_z + Σ_j q_j (G_z − G_{z'})(· − y_j)`, which is
    /// bounded at the centers; the new charges are recomputed from `Γ(z')`.
    pub fn redecompose(&self, cfg: &InteractionConfig, z_new: C64) -> Result<DomainElement> {
        let old = self.clone();
        let (z_old, zn) = (self.z, z_new);
        let regular = move |x: &Point3| {
            let mut v = old.regular.eval(x);
            for (y, q) in old.centers.iter().zip(&old.charges) {
                let r = distance(x, y);
                let diff = if r < 1e-12 {
                    I * (z_old - zn) / (4.0 * PI)
                } else {
                    ((I * z_old * r).exp() - (I * zn * r).exp()) / (4.0 * PI * r)
                };
                v += q * diff;
            }
            v
        };
        build_domain_element(cfg, z_new, Arc::new(regular))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetheFit {
    /// Coefficient of `1/|x − y_j|`.
    pub c: C64,
    /// Constant term.
    pub b: C64,
    /// Root-mean-square residual of the fit relative to the largest sample.
    pub residual: f64,
}

impl BetheFit {
    /// `b/(4πc)`, which equals `α_j` for a domain element.
    pub fn alpha_estimate(&self) -> C64 {
        self.b / (4.0 * PI * self.c)
    }
}

/// Default relative RMS residual accepted by the near-center fit. Smooth
/// `O(r²)` variation over the outermost fit radius sits well below this.
pub const FIT_TOL: f64 = 5e-2;

/// Least-squares fit of `ψ(r) ≈ c/r + b` on the supplied samples.
pub fn bethe_peierls_fit(samples: &[(f64, C64)], tol: f64) -> Result<BetheFit> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let a = DMatrix::from_fn(n, 2, |i, k| C64::new(if k == 0 { 1.0 / samples[i].0 } else { 1.0 }, 0.0));
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let resid = &a * &coef - &y;
    let scale = samples.iter().map(|s| s.1.norm()).fold(0.0, f64::max).max(1e-300);
    let rms = (resid.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64).sqrt() / scale;
    if rms > tol {
        return Err(Error::FitDiverged(rms));
    }
    Ok(BetheFit {
        c: coef[0],
        b: coef[1],
        residual: rms,
    })
}

/// Spherical means of `ψ` over the six axis directions at radii
/// `d·10^{-1 … -3}` (geometric, `count` points) around `center`.
pub fn near_center_samples(psi: &dyn Fn(&Point3) -> C64, center: &Point3, d: f64, count: usize) -> Vec<(f64, C64)> {
    let dirs: [Point3; 6] = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    (0..count)
        .map(|k| {
            let e = -1.0 - 2.0 * k as f64 / (count - 1).max(1) as f64;
            let r = d * 10f64.powf(e);
            let mean: C64 = dirs
                .iter()
                .map(|u| psi(&[center[0] + r * u[0], center[1] + r * u[1], center[2] + r * u[2]]))
                .sum::<C64>()
                / 6.0;
            (r, mean)
        })
        .collect()
}

/// Near-center expansion at every active center of a domain element.
pub fn bethe_peierls_extract(elem: &DomainElement, cfg: &InteractionConfig) -> Result<Vec<BetheFit>> {
    let d = cfg.min_pairwise_distance().unwrap_or(1.0);
    let psi = |x: &Point3| elem.psi(x);
    elem.centers
        .iter()
        .map(|y| bethe_peierls_fit(&near_center_samples(&psi, y, d, 9), FIT_TOL))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: C64, b: C64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b} (tol {tol:e})");
    }

    #[test]
    fn green_kernel_examples() {
        let g = green_kernel(C64::new(0.0, 0.0), &[1.0, 0.0, 0.0]).unwrap();
        assert!((g.re - 0.079_577_5).abs() < 1e-7);
        let g = green_kernel(C64::new(0.0, 1.0), &[0.0, 2.0, 0.0]).unwrap();
        assert!((g.re - (-2.0f64).exp() / (8.0 * PI)).abs() < 1e-15);
        assert_eq!(green_kernel(I, &[0.0; 3]), Err(Error::Origin));
        assert_eq!(green_tilde(I, 0.0), ZERO);
    }

    #[test]
    fn green_kernel_l2_norm_closed_form() {
        // ‖G_{iλ}‖₂² = 1/(8πλ).
        for &lam in &[0.5, 1.0, 3.0] {
            let grid = crate::grid::RadialGrid::geometric_uniform(1e-8, 60.0 / lam, 0.05);
            let g = crate::grid::RadialFunction::from_fn(&grid, |r| green_tilde(C64::new(0.0, lam), r));
            let n2 = g.l2_norm().powi(2);
            let exact = 1.0 / (8.0 * PI * lam);
            assert!((n2 - exact).abs() / exact < 1e-4, "{n2} vs {exact}");
        }
    }

    #[test]
    fn free_resolvent_of_gaussian_solves_helmholtz() {
        // Check (−Δ + λ²) u = v for u = R₀(iλ)v with radial finite differences.
        let lam = 2.0;
        let v = Arc::new(GaussianProfile { amp: C64::new(1.0, 0.0), width: 1.0 });
        let u = FreeResolventProfile::new(C64::new(0.0, lam), v.clone());
        for &s in &[0.3, 1.0, 2.5] {
            let h = 1e-3;
            let su = |s: f64| u.eval(s) * s;
            let lap = (su(s + h) - 2.0 * su(s) + su(s - h)) / (h * h) / s;
            let res = -lap + lam * lam * u.eval(s) - v.eval(s);
            assert!(res.norm() < 1e-5, "s = {s}: {res}");
        }
    }

    #[test]
    fn free_resolvent_of_green_profile_matches_resolvent_identity() {
        // R₀(z₁) G_{z₂} = (G_{z₁} − G_{z₂}) / (z₁² − z₂²).
        let (z1, z2) = (C64::new(0.0, 2.0), C64::new(0.5, 3.0));
        let u = FreeResolventProfile::new(z1, Arc::new(GreenProfile { z: z2 }));
        for &s in &[1e-3, 0.2, 1.0, 4.0] {
            let exact = (green_tilde(z1, s) - green_tilde(z2, s)) / (z1 * z1 - z2 * z2);
            assert_close(u.eval(s), exact, 1e-12);
        }
        let at0 = I * (z1 - z2) / (4.0 * PI * (z1 * z1 - z2 * z2));
        assert_close(u.eval(0.0), at0, 1e-12);
    }

    #[test]
    fn inert_centers_give_free_resolvent() {
        let cfg = InteractionConfig::new(vec![[0.0; 3]], vec![crate::config::Strength::Infinite]).unwrap();
        let f = RadialSum::gaussian([0.5, 0.0, 0.0], C64::new(1.0, 0.0), 0.7);
        let z = C64::new(0.0, 2.0);
        let r = apply_perturbed_resolvent_sum(&cfg, z, &f).unwrap();
        let r0 = apply_free_resolvent(z, &f);
        for x in [[0.1, 0.2, 0.3], [2.0, -1.0, 0.0]] {
            assert_close(r.eval(&x), r0.eval(&x), 1e-15);
        }
    }

    #[test]
    fn rank_one_correction_matches_independent_moment() {
        // N = 1, α = 1, z = 2i, narrow bump at distance 3.
        let cfg = InteractionConfig::single(1.0);
        let z = C64::new(0.0, 2.0);
        let c = [3.0, 0.0, 0.0];
        let width = 0.3;
        let f = RadialSum::gaussian(c, C64::new(1.0, 0.0), width);
        let out = apply_perturbed_resolvent_sum(&cfg, z, &f).unwrap();
        let free = apply_free_resolvent(z, &f);
        // Moment ∫ G_z(y) f(y) dy by a product rule in spherical coordinates about c.
        let (mut moment, mut nodes, mut wts) = (ZERO, Vec::new(), Vec::new());
        for k in 0..16 {
            push_panel(k as f64 * 0.125, (k + 1) as f64 * 0.125, &mut nodes, &mut wts);
        }
        let (ct, wt) = crate::quadrature::gauss_legendre(48);
        for (rho, wr) in nodes.iter().zip(&wts) {
            for (u, wu) in ct.iter().zip(&wt) {
                let y = [c[0] + rho * u, rho * (1.0 - u * u).sqrt(), 0.0];
                let fv = (-(rho / width).powi(2)).exp();
                moment += green_tilde(z, distance(&y, &[0.0; 3])) * fv * (2.0 * PI * rho * rho * wr * wu);
            }
        }
        let gamma = 1.0 + 2.0 / (4.0 * PI);
        for x in [[0.5, 0.0, 0.0], [-1.0, 1.0, 0.5]] {
            let corr = out.eval(&x) - free.eval(&x);
            let expected = moment / gamma * green_tilde(z, distance(&x, &[0.0; 3]));
            assert_close(corr, expected, 1e-10 * expected.norm().max(1e-30) + 1e-14);
        }
    }

    #[test]
    fn box_resolvent_agrees_with_radial_route() {
        let cfg = InteractionConfig::single(1.0);
        let z = C64::new(0.0, 2.0);
        let f_sum = RadialSum::gaussian([0.7, 0.0, 0.0], C64::new(1.0, 0.0), 1.2);
        let f_box = Field3D::cube(4.0, 20, |x| f_sum.eval(x));
        let r_box = apply_perturbed_resolvent(&cfg, z, &f_box).unwrap();
        let r_exact = apply_perturbed_resolvent_sum(&cfg, z, &f_sum).unwrap().sample(&f_box);
        let err = r_box.zip_with(&r_exact, |a, b| a - b).l2_norm() / r_exact.l2_norm();
        assert!(err < 8e-2, "relative error {err}");
    }

    #[test]
    fn resolvent_identity_holds_on_box() {
        let cfg = InteractionConfig::new(vec![[0.0; 3], [1.0, 0.5, 0.0]], vec![0.3.into(), (-0.1).into()]).unwrap();
        let f = RadialSum::gaussian([0.4, -0.3, 0.2], C64::new(1.0, -0.5), 0.9);
        let res = resolvent_identity_residual(&cfg, 2.0 * I, 3.0 * I, &f, 5.0, 32).unwrap();
        assert!(res < 1e-6, "residual {res:e}");
    }

    #[test]
    fn seeded_identity_draws() {
        let cfg = InteractionConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.5.into(), (-0.2).into()]).unwrap();
        let a = resolvent_identity_checks(&cfg, 11, 3).unwrap();
        let b = resolvent_identity_checks(&cfg, 11, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.z1, x.z2, x.residual), (y.z1, y.z2, y.residual));
            assert!(x.residual < 1e-6, "{x:?}");
        }
    }

    #[test]
    fn real_symmetric_case_maps_real_to_real() {
        let cfg = InteractionConfig::new(vec![[0.0; 3], [1.2, 0.0, 0.0]], vec![0.4.into(), (-0.2).into()]).unwrap();
        let f = RadialSum::gaussian([0.3, 0.5, 0.0], C64::new(1.0, 0.0), 0.6);
        let out = apply_perturbed_resolvent_sum(&cfg, C64::new(0.0, 1.5), &f).unwrap();
        for x in [[0.1, 0.1, 0.1], [2.0, 0.0, -1.0], [0.6, -0.4, 0.9]] {
            assert!(out.eval(&x).im.abs() < 1e-10);
        }
    }

    #[test]
    fn domain_element_examples() {
        let cfg = InteractionConfig::single(1.0);
        let zero = build_domain_element(&cfg, I, Arc::new(|_: &Point3| ZERO)).unwrap();
        assert_eq!(zero.charges, vec![ZERO]);
        assert_eq!(zero.psi(&[0.3, 0.0, 0.0]), ZERO);

        let gauss = RadialSum::gaussian([0.0; 3], C64::new(1.0, 0.0), 1.0);
        let e = build_domain_element(&cfg, I, Arc::new(gauss)).unwrap();
        assert_close(e.charges[0], C64::new(1.0 / (1.0 + 1.0 / (4.0 * PI)), 0.0), 1e-12);
    }

    #[test]
    fn decomposition_is_independent_of_z() {
        let cfg = InteractionConfig::new(vec![[0.0; 3], [1.5, 0.0, 0.0]], vec![0.7.into(), (-0.3).into()]).unwrap();
        let phi = RadialSum::gaussian([0.4, 0.2, 0.0], C64::new(1.0, 0.5), 1.1);
        let e1 = build_domain_element(&cfg, I, Arc::new(phi)).unwrap();
        let e2 = e1.redecompose(&cfg, 2.0 * I).unwrap();
        for (a, b) in e1.charges.iter().zip(&e2.charges) {
            assert_close(*a, *b, 1e-12);
        }
        for x in [[2.0, 0.0, 0.0], [0.0, 0.7, 0.0], [-1.0, 1.0, 1.0], [1.5, 0.6, 0.0]] {
            assert_close(e1.psi(&x), e2.psi(&x), 1e-8);
        }
    }

    #[test]
    fn bethe_peierls_examples() {
        let g = |x: &Point3| green_tilde(I, distance(x, &[0.0; 3]));
        let fit = bethe_peierls_fit(&near_center_samples(&g, &[0.0; 3], 1.0, 9), FIT_TOL).unwrap();
        assert_close(fit.c, C64::new(1.0 / (4.0 * PI), 0.0), 1e-4);
        // The O(r) term of e^{-r} biases b by about r_max/2 relative.
        assert!((fit.b.re * 4.0 * PI + 1.0).abs() < 0.02, "{}", fit.b);

        let smooth = |x: &Point3| C64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0);
        let fit = bethe_peierls_fit(&near_center_samples(&smooth, &[0.0; 3], 1.0, 9), FIT_TOL).unwrap();
        assert!(fit.c.norm() < 1e-4);

        for &alpha in &[-1.0, 0.5, 2.0] {
            let cfg = InteractionConfig::single(alpha);
            let phi = RadialSum::gaussian([0.0; 3], C64::new(1.0, 0.0), 1.0);
            let e = build_domain_element(&cfg, I, Arc::new(phi)).unwrap();
            let fits = bethe_peierls_extract(&e, &cfg).unwrap();
            let est = fits[0].alpha_estimate();
            assert!((est.re - alpha).abs() < 0.01 * alpha.abs(), "{est} vs {alpha}");
        }
    }

    #[test]
    fn fit_rejects_noise() {
        let samples: Vec<(f64, C64)> = (0..9).map(|k| (0.1 / (k + 1) as f64, C64::new((k % 2) as f64, 0.0))).collect();
        assert!(matches!(bethe_peierls_fit(&samples, FIT_TOL), Err(Error::FitDiverged(_))));
    }
}
