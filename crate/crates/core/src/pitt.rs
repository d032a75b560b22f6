//! Discrete Pitt inequality on the line:
//! `(∫|ĥ(ξ)|^η |ξ|^{βη} dξ)^{1/η} ≤ C (∫|h(x)|^γ |x|^{bγ} dx)^{1/γ}`
//! with `ĥ(ξ) = ∫ h(ρ) e^{-iξρ} dρ` (no `2π` normalization).

use std::f64::consts::PI;

use num_rational::Ratio;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

pub type Q = Ratio<i64>;

/// Version tag of the seeded test corpus; bump when its definition changes.
pub const CORPUS_VERSION: u32 = 1;

/// Exponents of one Pitt inequality, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PittParams {
    pub gamma: Q,
    pub eta: Q,
    pub b: Q,
    pub beta: Q,
}

fn q_str(x: Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

impl Serialize for PittParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PittParams", 4)?;
        st.serialize_field("gamma", &q_str(self.gamma))?;
        st.serialize_field("eta", &q_str(self.eta))?;
        st.serialize_field("b", &q_str(self.b))?;
        st.serialize_field("beta", &q_str(self.beta))?;
        st.end()
    }
}

impl PittParams {
    /// General instance; `β = 1 − 1/γ − 1/η − b`.
    pub fn new(gamma: Q, eta: Q, b: Q) -> Result<Self> {
        let one = Q::from_integer(1);
        if gamma <= one || eta < gamma {
            return Err(Error::PittParameters(format!("need 1 < γ ≤ η, got γ = {}, η = {}", q_str(gamma), q_str(eta))));
        }
        let gamma_dual_inv = one - gamma.recip();
        if b <= Q::from_integer(0) || b >= gamma_dual_inv {
            return Err(Error::PittParameters(format!(
                "need 0 < b < 1/γ' = {}, got b = {}",
                q_str(gamma_dual_inv),
                q_str(b)
            )));
        }
        let beta = one - gamma.recip() - eta.recip() - b;
        if beta >= Q::from_integer(0) {
            return Err(Error::PittParameters(format!("β = {} must be negative", q_str(beta))));
        }
        Ok(PittParams { gamma, eta, b, beta })
    }

    /// The dictionary `γ = p`, `η = q`, `b = (2−p)/p`, `β = (2−q)/q`. The two
    /// expressions for `β` agree exactly when `1/p + 1/q = 1`.
    pub fn from_pq(p: Q, q: Q) -> Result<Self> {
        let (b, beta) = Self::dictionary(p, q)?;
        let out = Self::new(p, q, b)?;
        debug_assert_eq!(out.beta, beta);
        Ok(out)
    }

    /// Dictionary exponents without the range checks; used by the
    /// `q ≥ 3` demonstration where the hypotheses fail by design.
    pub fn from_pq_unchecked(p: Q, q: Q) -> Result<Self> {
        let (b, beta) = Self::dictionary(p, q)?;
        Ok(PittParams { gamma: p, eta: q, b, beta })
    }

    /// `NonDual` unless `1/p + 1/q = 1`.
    pub fn dictionary_check(p: Q, q: Q) -> Result<()> {
        Self::dictionary(p, q).map(|_| ())
    }

    fn dictionary(p: Q, q: Q) -> Result<(Q, Q)> {
        let two = Q::from_integer(2);
        let b = (two - p) / p;
        let beta = (two - q) / q;
        if Q::from_integer(1) - p.recip() - q.recip() - b != beta {
            let s = p.recip() + q.recip();
            return Err(Error::NonDual(*s.numer() as f64 / *s.denom() as f64));
        }
        Ok((b, beta))
    }

    fn f(x: Q) -> f64 {
        *x.numer() as f64 / *x.denom() as f64
    }

    pub fn gamma_f(&self) -> f64 {
        Self::f(self.gamma)
    }
    pub fn eta_f(&self) -> f64 {
        Self::f(self.eta)
    }
    pub fn b_f(&self) -> f64 {
        Self::f(self.b)
    }
    pub fn beta_f(&self) -> f64 {
        Self::f(self.beta)
    }
}

/// Parse `"5/3"`, `"2.5"` or `"3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    if let Ok(r) = s.parse::<Q>() {
        return Ok(r);
    }
    let v: f64 = s.parse().map_err(|_| Error::InvalidArgument(format!("not a number: {s}")))?;
    Q::approximate_float(v).ok_or_else(|| Error::InvalidArgument(format!("not representable: {s}")))
}

/// Uniform samples `h(k·dx)`, `k = 0..n`, extended by zero; between samples
/// `h` is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSamples {
    pub dx: f64,
    pub values: Vec<C64>,
}

impl LineSamples {
    pub fn from_fn(len: f64, dx: f64, f: impl Fn(f64) -> C64) -> Self {
        let n = (len / dx).round() as usize;
        LineSamples {
            dx,
            values: (0..=n).map(|k| f(k as f64 * dx)).collect(),
        }
    }
}

/// `a(θ) = ∫_0^1 e^{-iθu} du`, `b(θ) = ∫_0^1 u e^{-iθu} du`.
fn filon_ab(theta: f64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    if theta.abs() < 1e-2 {
        // Σ (−iθ)^n / (n+1)!, Σ (−iθ)^n / (n! (n+2)).
        let mut a = C64::new(0.0, 0.0);
        let mut b = C64::new(0.0, 0.0);
        let mut pow = C64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..10 {
            if n > 0 {
                fact *= n as f64;
                pow *= -i * theta;
            }
            a += pow / (fact * (n + 1) as f64);
            b += pow / (fact * (n + 2) as f64);
        }
        return (a, b);
    }
    let e = C64::cis(-theta);
    let a = (1.0 - e) / (i * theta);
    let b = i * e / theta - (1.0 - e) / (theta * theta);
    (a, b)
}

/// `ĥ(ξ)` of the piecewise-linear interpolant, exactly.
pub fn fourier_transform_line(h: &LineSamples, xis: &[f64]) -> Vec<C64> {
    xis.iter().map(|&xi| transform_at(h, xi)).collect()
}

fn transform_at(h: &LineSamples, xi: f64) -> C64 {
    let (a, b) = filon_ab(xi * h.dx);
    let step = C64::cis(-xi * h.dx);
    let mut phase = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..h.values.len().saturating_sub(1) {
        if k % 256 == 0 {
            phase = C64::cis(-xi * h.dx * k as f64);
        }
        let (h0, h1) = (h.values[k], h.values[k + 1]);
        acc += phase * (h0 * a + (h1 - h0) * b);
        phase *= step;
    }
    acc * h.dx
}

/// `ξ`-grid: `per_decade` log-spaced points on `[ξ_min, ξ_max]`, both signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiGrid {
    pub xi_min: f64,
    pub xi_max: f64,
    pub per_decade: usize,
}

impl Default for XiGrid {
    fn default() -> Self {
        XiGrid {
            xi_min: 1e-3,
            xi_max: 1e3,
            per_decade: 100,
        }
    }
}

impl XiGrid {
    pub fn refined(&self) -> Self {
        XiGrid {
            per_decade: 2 * self.per_decade,
            ..*self
        }
    }

    fn points(&self) -> Vec<f64> {
        let decades = (self.xi_max / self.xi_min).log10();
        let n = (decades * self.per_decade as f64).ceil() as usize;
        let (l0, l1) = (self.xi_min.ln(), self.xi_max.ln());
        (0..=n).map(|k| (l0 + (l1 - l0) * k as f64 / n as f64).exp()).collect()
    }
}

/// `∫_{|ξ|∈[ξ_min, ξ_max]} |ĥ|^η |ξ|^{βη} dξ` by the trapezoid rule in `ln ξ`,
/// plus analytic end caps: `|ĥ(0)|^η ξ_min^{βη+1}/(βη+1)` per sign at the low
/// end when `βη > −1` (omitted otherwise, the integral then diverges at 0), and
/// a `1/ξ` decay extrapolation at the high end.
fn lhs_integral(h: &LineSamples, params: &PittParams, grid: &XiGrid) -> f64 {
    let eta = params.eta_f();
    let be = params.beta_f() * eta;
    let xs = grid.points();
    let h0 = transform_at(h, 0.0).norm();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let g: Vec<f64> = xs
            .iter()
            .map(|&x| transform_at(h, sign * x).norm().powf(eta) * x.powf(be) * x)
            .collect();
        let ds = (xs[1] / xs[0]).ln();
        total += ds * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[g.len() - 1]));
        if be > -1.0 {
            total += h0.powf(eta) * grid.xi_min.powf(be + 1.0) / (be + 1.0);
        }
        let tail_exp = be - eta + 1.0;
        if tail_exp < 0.0 {
            let last = transform_at(h, sign * grid.xi_max).norm();
            total += last.powf(eta) * grid.xi_max.powf(be + 1.0) / -tail_exp;
        }
    }
    total
}

/// `∫_0^L |h(x)|^γ x^{bγ} dx` with `|h|^γ` linear between samples and the
/// power weight integrated exactly on each cell.
fn rhs_integral(h: &LineSamples, params: &PittParams) -> f64 {
    let gamma = params.gamma_f();
    let s = params.b_f() * gamma;
    let dx = h.dx;
    let m = |x: f64, k: f64| x.powf(k) / k;
    let mut total = 0.0;
    for k in 0..h.values.len().saturating_sub(1) {
        let (x0, x1) = (k as f64 * dx, (k + 1) as f64 * dx);
        let (g0, g1) = (h.values[k].norm().powf(gamma), h.values[k + 1].norm().powf(gamma));
        let slope = (g1 - g0) / dx;
        // ∫ (g0 + slope (x − x0)) x^s dx.
        let i0 = m(x1, s + 1.0) - m(x0, s + 1.0);
        let i1 = m(x1, s + 2.0) - m(x0, s + 2.0);
        total += (g0 - slope * x0) * i0 + slope * i1;
    }
    total
}

/// LHS/RHS of the inequality for one `h`.
pub fn pitt_ratio(params: &PittParams, h: &LineSamples, grid: &XiGrid) -> Result<f64> {
    if h.values.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let lhs = lhs_integral(h, params, grid).powf(1.0 / params.eta_f());
    let rhs = rhs_integral(h, params).powf(1.0 / params.gamma_f());
    if rhs == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(lhs / rhs)
}

/// One member of the seeded corpus, as an analytic profile on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorpusFunction {
    /// `a e^{−(ρ−c)²/σ²}`.
    Gaussian { amp: [f64; 2], center: f64, width: f64 },
    /// `e^{−iρ²/4t} ρ e^{−ρ²/σ²}`, the form `h` takes for Gaussian radial data.
    Chirped { t: f64, width: f64 },
    /// `a exp(−1/(1 − ((ρ−c)/w)²))` inside `|ρ − c| < w`.
    Bump { amp: [f64; 2], center: f64, half_width: f64 },
}

impl CorpusFunction {
    pub fn eval(&self, rho: f64) -> C64 {
        match *self {
            CorpusFunction::Gaussian { amp, center, width } => {
                C64::new(amp[0], amp[1]) * (-((rho - center) / width).powi(2)).exp()
            }
            CorpusFunction::Chirped { t, width } => {
                C64::cis(-rho * rho / (4.0 * t)) * rho * (-(rho / width).powi(2)).exp()
            }
            CorpusFunction::Bump { amp, center, half_width } => {
                let u = (rho - center) / half_width;
                if u.abs() >= 1.0 {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(amp[0], amp[1]) * (-1.0 / (1.0 - u * u)).exp()
                }
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CorpusFunction::Gaussian { .. } => "gaussian",
            CorpusFunction::Chirped { .. } => "chirped",
            CorpusFunction::Bump { .. } => "bump",
        }
    }
}

/// Window length of the corpus functions.
pub const CORPUS_WINDOW: f64 = 10.0;

/// `count` functions cycling through the three kinds, parameters drawn from a
/// ChaCha8 stream seeded with `seed`.
pub fn corpus(seed: u64, count: usize) -> Vec<CorpusFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let amp = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            match k % 3 {
                0 => CorpusFunction::Gaussian {
                    amp,
                    center: rng.random_range(0.0..3.0),
                    width: rng.random_range(0.3..1.5),
                },
                1 => CorpusFunction::Chirped {
                    t: rng.random_range(0.1..4.0),
                    width: rng.random_range(0.5..2.0),
                },
                _ => CorpusFunction::Bump {
                    amp,
                    center: rng.random_range(0.5..4.0),
                    half_width: rng.random_range(0.3..1.5),
                },
            }
        })
        .collect()
}

/// Sampling resolution shared by the corpus runs; refinement halves `dx` and
/// doubles the `ξ` density together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PittResolution {
    pub dx: f64,
    pub xi: XiGrid,
}

impl Default for PittResolution {
    fn default() -> Self {
        PittResolution {
            dx: 0.02,
            xi: XiGrid::default(),
        }
    }
}

impl PittResolution {
    pub fn refined(&self) -> Self {
        PittResolution {
            dx: self.dx / 2.0,
            xi: self.xi.refined(),
        }
    }
}

pub fn ratio_of(params: &PittParams, f: &CorpusFunction, res: &PittResolution) -> Result<f64> {
    let h = LineSamples::from_fn(CORPUS_WINDOW, res.dx, |x| f.eval(x));
    pitt_ratio(params, &h, &res.xi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PittScan {
    pub params: PittParams,
    pub seed: u64,
    pub corpus_version: u32,
    pub functions: Vec<CorpusFunction>,
    /// Per-function ratios at the base resolution.
    pub ratios: Vec<f64>,
    /// Corpus maximum at each refinement level.
    pub max_by_level: Vec<f64>,
    pub max_ratio: f64,
    /// Largest relative change of the maximum between successive levels.
    pub refinement_delta: f64,
    pub regime: &'static str,
}

/// Corpus maximum of the ratio, with `levels − 1` refinements of the maximizer
/// and of the whole corpus.
pub fn pitt_scan(seed: u64, count: usize, p: Q, q: Q, levels: usize) -> Result<PittScan> {
    if q >= Q::from_integer(3) {
        return Err(Error::Regime);
    }
    let params = PittParams::from_pq(p, q)?;
    scan_with(params, seed, count, levels)
}

pub fn scan_with(params: PittParams, seed: u64, count: usize, levels: usize) -> Result<PittScan> {
    let functions = corpus(seed, count);
    let mut res = PittResolution::default();
    let mut ratios = Vec::new();
    let mut max_by_level = Vec::new();
    for level in 0..levels.max(1) {
        let rs = functions.iter().map(|f| ratio_of(&params, f, &res)).collect::<Result<Vec<_>>>()?;
        max_by_level.push(rs.iter().cloned().fold(0.0, f64::max));
        if level == 0 {
            ratios = rs;
        }
        res = res.refined();
    }
    let refinement_delta = max_by_level
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(PittScan {
        params,
        seed,
        corpus_version: CORPUS_VERSION,
        functions,
        ratios,
        max_ratio: *max_by_level.last().unwrap(),
        max_by_level,
        refinement_delta,
        regime: "bounded",
    })
}

/// `h_n(ρ) = n·φ(nρ)` with `φ` a smoothed indicator of `[0, 1]` (unit mass).
pub fn concentrating_member(n: f64, dx_base: f64) -> LineSamples {
    let phi = |x: f64| {
        // Smooth step down across [0.9, 1.1].
        let u = (x - 0.9) / 0.2;
        if u <= 0.0 {
            1.0
        } else if u >= 1.0 {
            0.0
        } else {
            let a = (-1.0 / u).exp();
            let b = (-1.0 / (1.0 - u)).exp();
            b / (a + b)
        }
    };
    let len = 1.2 / n;
    let dx = (dx_base / n).min(len / 64.0);
    LineSamples::from_fn(len, dx, |x| C64::new(n * phi(n * x), 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupDemo {
    pub params: PittParams,
    pub family: Vec<f64>,
    pub ratios: Vec<f64>,
    pub growth: f64,
    pub strictly_increasing: bool,
}

/// Ratios along the concentrating family for the dictionary exponents of
/// `(p, q)`, with `p` the dual exponent of `q`. No range checks: for `q ≥ 3`
/// the hypotheses of the inequality fail, which is the point of the demo.
pub fn pitt_blowup_demo(q: Q, family: &[f64], grid: &XiGrid) -> Result<BlowupDemo> {
    let p = q / (q - Q::from_integer(1));
    let params = PittParams::from_pq_unchecked(p, q)?;
    let ratios = family
        .iter()
        .map(|&n| pitt_ratio(&params, &concentrating_member(n, 0.02), grid))
        .collect::<Result<Vec<_>>>()?;
    let strictly_increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    Ok(BlowupDemo {
        params,
        family: family.to_vec(),
        growth: ratios.last().unwrap() / ratios[0],
        ratios,
        strictly_increasing,
    })
}

/// Ratio of a fixed profile as the lower `ξ` cutoff shrinks; for `q ≥ 3` the
/// weight `|ξ|^{2−q}` is not integrable at 0 and the ratio grows without bound.
pub fn xi_cutoff_sweep(q: Q, h: &LineSamples, cutoffs: &[f64]) -> Result<Vec<f64>> {
    let p = q / (q - Q::from_integer(1));
    let params = PittParams::from_pq_unchecked(p, q)?;
    cutoffs
        .iter()
        .map(|&c| {
            let grid = XiGrid {
                xi_min: c,
                ..XiGrid::default()
            };
            pitt_ratio(&params, h, &grid)
        })
        .collect()
}

/// `√(2π)`, the ratio for `γ = η = 2`, `b = β = 0` under this transform convention.
pub fn plancherel_constant() -> f64 {
    (2.0 * PI).sqrt()
}
