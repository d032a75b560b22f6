//! Decay experiments: evolve radial data, record weighted norms against time
//! and fit log-log slopes against the predicted exponents.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::{InteractionConfig, Strength, WeightSpec};
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::norms::{norm, Flavor, Weighting};
use crate::propagator::{evolve, CaseTag, EvolutionRequest, Projection, PropagatorOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "SCREAMING-KEBAB-CASE")]
pub enum DecayCase {
    /// `−(3/2)(1/p − 1/q)`.
    Generic,
    /// `−(1/2)(1/p − 1/q)`.
    Resonant,
    /// `−1/2 + ε/q`.
    ResonantWeighted {
        #[serde(serialize_with = "exponent_ser")]
        q: f64,
        eps: f64,
    },
    /// `−1/2`, the resonant endpoint rate of the weighted Lorentz conjecture.
    ResonantEndpoint,
}

fn inv(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Exponents serialize as numbers, with `"inf"` for `∞`.
pub(crate) fn exponent_ser<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

pub fn check_dual(p: f64, q: f64) -> Result<()> {
    let s = inv(p) + inv(q);
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::NonDual(s));
    }
    Ok(())
}

/// Dual exponent `q' = q/(q − 1)`.
pub fn dual(q: f64) -> f64 {
    if q.is_infinite() {
        1.0
    } else if q == 1.0 {
        f64::INFINITY
    } else {
        q / (q - 1.0)
    }
}

pub fn predicted_exponent(p: f64, q: f64, case: DecayCase) -> Result<f64> {
    check_dual(p, q)?;
    let gap = inv(p) - inv(q);
    Ok(match case {
        DecayCase::Generic => -1.5 * gap,
        DecayCase::Resonant => -0.5 * gap,
        DecayCase::ResonantWeighted { q, eps } => -0.5 + eps * inv(q),
        DecayCase::ResonantEndpoint => -0.5,
    })
}

/// Which couplings a preset is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaRequirement {
    /// `α ≠ 0`, including the free flow.
    Generic,
    /// `α = 0`.
    Zero,
    Any,
}

/// Norm pair, projection and predicted rate of one cited estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub alpha: AlphaRequirement,
    #[serde(serialize_with = "exponent_ser")]
    pub p: f64,
    #[serde(serialize_with = "exponent_ser")]
    pub q: f64,
    pub left: Weighting,
    pub left_flavor: Flavor,
    pub right: Weighting,
    pub projection: Projection,
    pub case: DecayCase,
    pub tolerance: f64,
    pub exploratory: bool,
}

pub const PRESET_NAMES: [&str; 9] = [
    "PRESET-16",
    "PRESET-17",
    "PRESET-18",
    "PRESET-23",
    "PRESET-25",
    "PRESET-25P",
    "PRESET-26",
    "PRESET-41",
    "PRESET-42",
];

/// Default ε of the q ≥ 3 weighted presets and the values swept by the conjecture scan.
pub const DEFAULT_EPS: f64 = 0.1;
pub const EPS_SWEEP: [f64; 3] = [0.05, 0.1, 0.2];

fn conj_q(q: f64) -> WeightSpec {
    WeightSpec::ConjQ { q, center: [0.0; 3] }
}

impl Preset {
    /// Build a named preset. `q` and `eps` override the defaults where the
    /// preset has them (`q = ∞` for 17/18, `5/2` for 23, `4` for the `q ≥ 3`
    /// presets); `p` is always the dual exponent.
    pub fn build(name: &str, q: Option<f64>, eps: Option<f64>) -> Result<Self> {
        let w = WeightSpec::singular_sum_origin;
        let eps = eps.unwrap_or(DEFAULT_EPS);
        let want_q = |default: f64, lo: f64, hi: f64| -> Result<f64> {
            let q = q.unwrap_or(default);
            if q < lo || q > hi || q.is_nan() {
                return Err(Error::InvalidArgument(format!("{name}: q = {q} outside [{lo}, {hi}]")));
            }
            Ok(q)
        };
        let strong = Flavor::Strong;
        let mk = |desc: &str,
                  alpha,
                  q: f64,
                  left: Weighting,
                  left_flavor,
                  right: Weighting,
                  projection,
                  case,
                  exploratory| Preset {
            name: name.to_string(),
            description: desc.to_string(),
            alpha,
            p: dual(q),
            q,
            left,
            left_flavor,
            right,
            projection,
            case,
            tolerance: 0.05,
            exploratory,
        };
        use AlphaRequirement as A;
        let preset = match name {
            "PRESET-16" => mk(
                "weighted L1 -> Linf, w^-1 left, w right",
                A::Generic,
                f64::INFINITY,
                Weighting::new(w(), -1.0),
                strong,
                Weighting::new(w(), 1.0),
                Projection::Ac,
                DecayCase::Generic,
                false,
            ),
            "PRESET-17" => {
                let q = want_q(f64::INFINITY, 2.0, f64::INFINITY)?;
                let p = dual(q);
                mk(
                    "weighted Lp' -> Lq, w^-(1-2/q) left, w^(2/p-1) right",
                    A::Generic,
                    q,
                    Weighting::new(w(), -(1.0 - 2.0 * inv(q))),
                    strong,
                    Weighting::new(w(), 2.0 / p - 1.0),
                    Projection::Ac,
                    DecayCase::Generic,
                    false,
                )
            }
            "PRESET-18" => {
                let q = want_q(f64::INFINITY, 2.0, f64::INFINITY)?;
                let p = dual(q);
                mk(
                    "resonant weighted Lp' -> Lq, w^-(1-2/q) left, w^(2/p-1) right",
                    A::Zero,
                    q,
                    Weighting::new(w(), -(1.0 - 2.0 * inv(q))),
                    strong,
                    Weighting::new(w(), 2.0 / p - 1.0),
                    Projection::Full,
                    DecayCase::Resonant,
                    false,
                )
            }
            "PRESET-23" => {
                let q = want_q(2.5, 2.0, 3.0 - 1e-12)?;
                mk(
                    "unweighted Lp' -> Lq for q in [2, 3)",
                    A::Any,
                    q,
                    Weighting::unit(),
                    strong,
                    Weighting::unit(),
                    Projection::Ac,
                    DecayCase::Generic,
                    false,
                )
            }
            "PRESET-25" | "PRESET-25P" => {
                let q = want_q(4.0, 3.0, f64::INFINITY)?;
                let p = dual(q);
                let a = 1.0 - (3.0 - eps) * inv(q);
                let right = if name == "PRESET-25" { a } else { (3.0 - eps) / p - 1.0 };
                mk(
                    if name == "PRESET-25" {
                        "weighted q >= 3, w^-(1-(3-eps)/q) left, w^(1-(3-eps)/q) right"
                    } else {
                        "weighted q >= 3, w^-(1-(3-eps)/q) left, w^((3-eps)/p-1) right"
                    },
                    A::Generic,
                    q,
                    Weighting::new(w(), -a),
                    strong,
                    Weighting::new(w(), right),
                    Projection::Ac,
                    DecayCase::Generic,
                    false,
                )
            }
            "PRESET-26" => {
                let q = want_q(4.0, 3.0, f64::INFINITY)?;
                let a = 1.0 - (3.0 - eps) * inv(q);
                mk(
                    "resonant weighted q >= 3, w^-(1-(3-eps)/q) left, w^(1-(3-eps)/q) right",
                    A::Zero,
                    q,
                    Weighting::new(w(), -a),
                    strong,
                    Weighting::new(w(), a),
                    Projection::Full,
                    DecayCase::ResonantWeighted { q, eps },
                    false,
                )
            }
            "PRESET-41" => {
                let q = want_q(4.0, 3.0, f64::INFINITY)?;
                mk(
                    "conjectured weighted Lorentz, w_q^-1 weak left, w_q right",
                    A::Generic,
                    q,
                    Weighting::new(conj_q(q), -1.0),
                    Flavor::WeakLorentz,
                    Weighting::new(conj_q(q), 1.0),
                    Projection::Ac,
                    DecayCase::Generic,
                    true,
                )
            }
            "PRESET-42" => {
                let q = want_q(4.0, 3.0, f64::INFINITY)?;
                mk(
                    "conjectured resonant weighted Lorentz, w_q^-1 weak left, w_q right",
                    A::Zero,
                    q,
                    Weighting::new(conj_q(q), -1.0),
                    Flavor::WeakLorentz,
                    Weighting::new(conj_q(q), 1.0),
                    Projection::Full,
                    DecayCase::ResonantEndpoint,
                    true,
                )
            }
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        Ok(preset)
    }

    pub fn predicted(&self) -> Result<f64> {
        predicted_exponent(self.p, self.q, self.case)
    }

    pub fn check_alpha(&self, cfg: &InteractionConfig) -> Result<()> {
        let s = cfg.single_strength()?;
        let ok = match self.alpha {
            AlphaRequirement::Any => true,
            AlphaRequirement::Zero => s == Strength::Finite(0.0),
            AlphaRequirement::Generic => s != Strength::Finite(0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{} is not meant for α = {s}", self.name)))
        }
    }
}

/// Initial data for decay runs: `e^{−r²/σ²}` on a geometric-uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianData {
    pub width2: f64,
}

/// Width used by the acceptance runs. The weighted sup-norm approaches its
/// rate like `t^{-2/3}` in units of `σ²`, so narrower data moves the
/// `t ∈ [1, 64]` window further into the asymptotic regime.
pub const DEFAULT_WIDTH2: f64 = 0.1;

impl Default for GaussianData {
    fn default() -> Self {
        GaussianData { width2: DEFAULT_WIDTH2 }
    }
}

impl GaussianData {
    pub fn sample(&self) -> RadialFunction {
        let s = self.width2.sqrt();
        let g = RadialGrid::geometric_uniform(1e-3, 8.0 * s, 0.1 * s);
        RadialFunction::from_real_fn(&g, |r| (-r * r / self.width2).exp())
    }

    /// Propagator options with `k_max` at least at the `e^{−25}` level of `f̂`
    /// and never below the default.
    pub fn options(&self) -> PropagatorOptions {
        let base = PropagatorOptions::default();
        PropagatorOptions {
            k_max: (10.0 / self.width2.sqrt()).max(base.k_max),
            ..base
        }
    }
}

/// Dyadic times `2^lo, …, 2^hi`.
pub fn dyadic_times(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

/// Norm pair and projection of one table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSetup {
    #[serde(serialize_with = "exponent_ser")]
    pub p: f64,
    #[serde(serialize_with = "exponent_ser")]
    pub q: f64,
    pub left: Weighting,
    pub left_flavor: Flavor,
    pub right: Weighting,
    pub projection: Projection,
}

impl From<&Preset> for NormSetup {
    fn from(p: &Preset) -> Self {
        NormSetup {
            p: p.p,
            q: p.q,
            left: p.left.clone(),
            left_flavor: p.left_flavor,
            right: p.right.clone(),
            projection: p.projection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub norm_left: f64,
    pub norm_right: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub setup: NormSetup,
    pub left_weight: String,
    pub right_weight: String,
    pub case: CaseTag,
    pub rows: Vec<DecayRow>,
    /// Times dropped because a norm diverged, with the reason.
    pub excluded: Vec<(f64, String)>,
}

impl DecayTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,norm_left,norm_right,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.t, r.norm_left, r.norm_right, r.ratio);
        }
        s
    }
}

/// Evolve `f` to each `t` and record the left norm of the evolved state and
/// the right norm of `f`.
pub fn run_decay(
    cfg: &InteractionConfig,
    f: &RadialFunction,
    setup: &NormSetup,
    times: &[f64],
    opts: &PropagatorOptions,
) -> Result<DecayTable> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    let norm_right = norm(f, setup.p, &setup.right, Flavor::Strong)?;
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    let mut case = CaseTag::Free;
    for &t in times {
        let req = EvolutionRequest::new(cfg.clone(), f.clone(), t)
            .projection(setup.projection)
            .options(*opts);
        let res = evolve(&req)?;
        case = res.case;
        match norm(&res.output, setup.q, &setup.left, setup.left_flavor) {
            Ok(n) if n.is_finite() => rows.push(DecayRow {
                t,
                norm_left: n,
                norm_right,
                ratio: n / norm_right,
            }),
            Ok(n) => excluded.push((t, format!("non-finite norm {n}"))),
            Err(Error::Divergent(why)) => excluded.push((t, why)),
            Err(e) => return Err(e),
        }
    }
    Ok(DecayTable {
        left_weight: format!("{}^{}", setup.left.weight.label(), setup.left.power),
        right_weight: format!("{}^{}", setup.right.weight.label(), setup.right.power),
        setup: setup.clone(),
        case,
        rows,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub predicted: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Conjectured rate: the verdict is informative, not a claim.
    pub exploratory: bool,
}

/// Slope, standard error and intercept of `ln y = a + s ln t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Ordinary least squares on `(t, y)` pairs with `t, y > 0`; needs 4 points.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t > 0.0 && *y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(PowerFit {
        slope,
        stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        intercept,
    })
}

/// Ordinary least squares of `ln(norm)` on `ln t` for rows with `t` in
/// `window` (all rows when `None`).
pub fn fit_decay(table: &DecayTable, window: Option<(f64, f64)>, predicted: f64, tolerance: f64) -> Result<DecayFit> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.t >= lo && r.t <= hi && r.norm_left > 0.0)
        .map(|r| (r.t, r.norm_left))
        .collect();
    let PowerFit { slope, stderr, intercept } = fit_power_law(&pts)?;
    Ok(DecayFit {
        slope,
        stderr,
        intercept,
        window: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
        predicted,
        tolerance,
        verdict: if (slope - predicted).abs() <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        exploratory: false,
    })
}

/// Table and fit for a preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetRun {
    pub preset: Preset,
    pub data: GaussianData,
    pub table: DecayTable,
    pub fit: DecayFit,
}

pub fn run_preset(cfg: &InteractionConfig, preset: &Preset, data: &GaussianData, times: &[f64]) -> Result<PresetRun> {
    preset.check_alpha(cfg)?;
    let table = run_decay(cfg, &data.sample(), &preset.into(), times, &data.options())?;
    let mut fit = fit_decay(&table, None, preset.predicted()?, preset.tolerance)?;
    fit.exploratory = preset.exploratory;
    Ok(PresetRun {
        preset: preset.clone(),
        data: *data,
        table,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureEntry {
    pub label: String,
    pub preset: Preset,
    pub table: DecayTable,
    /// `None` when fewer than four times have a finite left norm.
    pub fit: Option<DecayFit>,
    /// Set when the weight family degenerates, e.g. `w_3 ≡ 2`.
    pub flags: Vec<String>,
}

/// Conjecture-regime scan for `q ≥ 3`: the weighted Lorentz presets with weak
/// and strong left norms, and the ε-shifted weights for each `ε` in
/// [`EPS_SWEEP`]. Every entry is exploratory.
pub fn conjecture_scan(alpha: f64, q: f64, data: &GaussianData, times: &[f64]) -> Result<Vec<ConjectureEntry>> {
    if q < 3.0 {
        return Err(Error::InvalidArgument(format!("conjecture scan needs q ≥ 3, got {q}")));
    }
    let cfg = InteractionConfig::single(alpha);
    let resonant = alpha == 0.0;
    let lorentz = if resonant { "PRESET-42" } else { "PRESET-41" };
    let shifted = if resonant { "PRESET-26" } else { "PRESET-25" };
    let mut flags = Vec::new();
    if (3.0 / q - 1.0).abs() < 1e-12 {
        flags.push("conj-q weight degenerates to the constant 2 at q = 3".to_string());
    }
    let mut plan: Vec<(String, Preset)> = Vec::new();
    let weak = Preset::build(lorentz, Some(q), None)?;
    let mut strong = weak.clone();
    strong.left_flavor = Flavor::Strong;
    plan.push((format!("{lorentz}/weak"), weak));
    plan.push((format!("{lorentz}/strong"), strong));
    for eps in EPS_SWEEP {
        plan.push((format!("{shifted}/eps={eps}"), Preset::build(shifted, Some(q), Some(eps))?));
    }
    plan.into_iter()
        .map(|(label, mut preset)| {
            preset.exploratory = true;
            preset.check_alpha(&cfg)?;
            let table = run_decay(&cfg, &data.sample(), &(&preset).into(), times, &data.options())?;
            let mut flags = flags.clone();
            // A left norm that is infinite at every time (e.g. the strong norm
            // where only the weak one is finite) is a result, not a failure.
            let fit = match fit_decay(&table, None, preset.predicted()?, preset.tolerance) {
                Ok(mut fit) => {
                    fit.exploratory = true;
                    Some(fit)
                }
                Err(Error::TooFewPoints(n)) => {
                    let why = table.excluded.first().map(|(_, why)| format!(": {why}")).unwrap_or_default();
                    flags.push(format!("no fit, {n} of {} times have a finite left norm{why}", times.len()));
                    None
                }
                Err(e) => return Err(e),
            };
            Ok(ConjectureEntry {
                label,
                preset,
                table,
                fit,
                flags,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, times: &[f64]) -> DecayTable {
        DecayTable {
            setup: NormSetup {
                p: 1.0,
                q: f64::INFINITY,
                left: Weighting::unit(),
                left_flavor: Flavor::Strong,
                right: Weighting::unit(),
                projection: Projection::Full,
            },
            left_weight: "unit".into(),
            right_weight: "unit".into(),
            case: CaseTag::Free,
            rows: times
                .iter()
                .map(|&t| DecayRow {
                    t,
                    norm_left: f(t),
                    norm_right: 1.0,
                    ratio: f(t),
                })
                .collect(),
            excluded: vec![],
        }
    }

    #[test]
    fn exponents() {
        let inf = f64::INFINITY;
        assert_eq!(predicted_exponent(1.0, inf, DecayCase::Generic).unwrap(), -1.5);
        assert_eq!(predicted_exponent(2.0, 2.0, DecayCase::Generic).unwrap(), 0.0);
        assert_eq!(predicted_exponent(1.0, inf, DecayCase::Resonant).unwrap(), -0.5);
        assert!((predicted_exponent(5.0 / 3.0, 2.5, DecayCase::Generic).unwrap() + 0.3).abs() < 1e-15);
        let rw = DecayCase::ResonantWeighted { q: 4.0, eps: 0.1 };
        assert!((predicted_exponent(4.0 / 3.0, 4.0, rw).unwrap() + 0.475).abs() < 1e-15);
        assert!(matches!(predicted_exponent(1.5, 2.5, DecayCase::Generic), Err(Error::NonDual(_))));
    }

    #[test]
    fn exact_power_law_fits_exactly() {
        let fit = fit_decay(&synthetic(|t| t.powf(-1.5), &dyadic_times(0, 6)), None, -1.5, 0.05).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12 && fit.stderr < 1e-12);
        assert_eq!(fit.verdict, Verdict::Pass);
    }

    #[test]
    fn moving_window_approaches_asymptotic_slope() {
        let table = synthetic(|t| t.powf(-1.5) * (1.0 + 0.1 / t), &dyadic_times(0, 12));
        let errs: Vec<f64> = (0..6)
            .map(|k| {
                let lo = 2f64.powi(k);
                (fit_decay(&table, Some((lo, lo * 64.0)), -1.5, 0.05).unwrap().slope + 1.5).abs()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
        assert!(errs[5] < 1e-3);
    }

    #[test]
    fn too_few_points() {
        let t = synthetic(|t| 1.0 / t, &dyadic_times(0, 6));
        assert_eq!(fit_decay(&t, Some((1.0, 4.0)), -1.0, 0.1).unwrap_err(), Error::TooFewPoints(3));
    }

    #[test]
    fn presets_resolve() {
        for name in PRESET_NAMES {
            let p = Preset::build(name, None, None).unwrap();
            check_dual(p.p, p.q).unwrap();
            p.predicted().unwrap();
        }
        let p17 = Preset::build("PRESET-17", None, None).unwrap();
        let p16 = Preset::build("PRESET-16", None, None).unwrap();
        assert_eq!((p17.left.power, p17.right.power), (p16.left.power, p16.right.power));
        let p25 = Preset::build("PRESET-25", Some(4.0), Some(0.1)).unwrap();
        assert!((p25.right.power - 0.275).abs() < 1e-12);
        let p25p = Preset::build("PRESET-25P", Some(4.0), Some(0.1)).unwrap();
        assert!((p25p.right.power - (2.9 * 0.75 - 1.0)).abs() < 1e-12);
        assert!(Preset::build("PRESET-23", Some(3.5), None).is_err());
        assert_eq!(Preset::build("PRESET-99", None, None).unwrap_err(), Error::UnknownPreset("PRESET-99".into()));
        let cfg = InteractionConfig::single(1.0);
        assert!(Preset::build("PRESET-18", None, None).unwrap().check_alpha(&cfg).is_err());
    }
}
