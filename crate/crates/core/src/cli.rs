//! Command-line runner. Every subcommand prints a JSON bundle (manifest plus
//! result) on stdout and, with `--out DIR`, writes the bundle, the manifest
//! and any CSV tables into `DIR`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigFile, InteractionConfig, Strength, WeightSpec};
use crate::decay::{self, DecayCase, GaussianData, Preset, Verdict};
use crate::error::{Error, Result};
use crate::gamma::{self, bound_state_value, green_tilde};
use crate::grid::RadialGrid;
use crate::norms::{self, Flavor, Weighting};
use crate::pitt;
use crate::propagator::{self, evolve, EvolutionRequest, Projection, PropagatorOptions, RPolicy};
use crate::resolvent::{self, RadialSum};
use crate::C64;

/// Version of the JSON/CSV layout written by the runner.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "pointdisp", version, about = "Point-interaction spectra, propagators and decay experiments")]
pub struct Cli {
    /// TOML file with centers, strengths, grid and box parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the output bundle.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct Coupling {
    /// Single center at the origin with this strength (`inf` for none);
    /// overrides `--config`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poles of Γ(z) on the imaginary axis and the resulting eigenvalues.
    Spectrum(SpectrumArgs),
    /// Smallest singular value of Γ(z) on a real z interval.
    AssumptionScan(ScanArgs),
    /// Resolvent identity residuals for seeded draws.
    ResolventCheck(ResolventArgs),
    /// Near-center expansion c/r + b of a domain element at each center.
    BethePeierls(BetheArgs),
    /// Evolve Gaussian radial data.
    Evolve(EvolveArgs),
    /// Norm of an analytic radial profile with a refinement study.
    Norm(NormArgs),
    /// Pitt inequality ratios on a seeded corpus.
    Pitt(PittArgs),
    /// Decay table and log-log fit for a preset or explicit norm pair.
    DecayFit(DecayArgs),
    /// Exploratory scan of the q ≥ 3 conjectures.
    Conjecture(ConjectureArgs),
    /// Radial free propagator against the boxed kernel sum.
    OracleCompare(OracleArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, default_value_t = 50.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    /// Upper end of the λ search; defaults to a bound past which Γ(iλ) is
    /// positive definite.
    #[arg(long)]
    pub lambda_max: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ResolventArgs {
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BetheArgs {
    #[command(flatten)]
    pub coupling: Coupling,
    /// Imaginary part of the spectral parameter z = i·z_im.
    #[arg(long, default_value_t = 1.0)]
    pub z_im: f64,
    /// Width of the Gaussian regular part.
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long = "t", value_delimiter = ',', default_value = "1")]
    pub times: Vec<f64>,
    #[arg(long, default_value = "full")]
    pub projection: String,
    /// Fixed cutoff R; escalate by doubling when absent.
    #[arg(long)]
    pub r_fixed: Option<f64>,
    #[arg(long)]
    pub s_cut: Option<f64>,
    /// σ² of the initial data e^{−r²/σ²}.
    #[arg(long, default_value_t = 1.0)]
    pub width2: f64,
    #[arg(long)]
    pub k_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Gaussian,
    Green,
    BoundState,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Unit,
    SingularSum,
    ConjQ,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlavorArg {
    Strong,
    WeakLorentz,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Strong => Flavor::Strong,
            FlavorArg::WeakLorentz => Flavor::WeakLorentz,
        }
    }
}

fn weighting(kind: WeightKind, power: f64, conj_q: f64) -> Weighting {
    match kind {
        WeightKind::Unit => Weighting::unit(),
        WeightKind::SingularSum => Weighting::new(WeightSpec::singular_sum_origin(), power),
        WeightKind::ConjQ => Weighting::new(WeightSpec::ConjQ { q: conj_q, center: [0.0; 3] }, power),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct NormArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub profile: Profile,
    /// σ² for `gaussian`.
    #[arg(long, default_value_t = 1.0)]
    pub width2: f64,
    /// λ for `green` (G_{iλ}), α < 0 for `bound-state`.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub param: f64,
    /// Exponent; `inf` for the sup-norm.
    #[arg(long, default_value = "2")]
    pub exponent: String,
    #[arg(long, value_enum, default_value = "unit")]
    pub weight: WeightKind,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub power: f64,
    /// q of the conj-q weight.
    #[arg(long, default_value_t = 4.0)]
    pub weight_q: f64,
    #[arg(long, value_enum, default_value = "strong")]
    pub flavor: FlavorArg,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PittArgs {
    /// Fractions like `5/3` or decimals.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, default_value_t = 30)]
    pub count: usize,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Times {
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub t_min_exp: i32,
    #[arg(long, default_value_t = 6)]
    pub t_max_exp: i32,
    /// σ² of the initial data e^{−r²/σ²}.
    #[arg(long, default_value_t = decay::DEFAULT_WIDTH2)]
    pub width2: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseArg {
    Generic,
    Resonant,
    ResonantEndpoint,
}

#[derive(Debug, Args, Serialize)]
pub struct DecayArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub times: Times,
    // Explicit norm pair when no preset is given; p is the dual of q.
    #[arg(long, value_enum, default_value = "unit")]
    pub left_weight: WeightKind,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub left_power: f64,
    #[arg(long, value_enum, default_value = "strong")]
    pub left_flavor: FlavorArg,
    #[arg(long, value_enum, default_value = "unit")]
    pub right_weight: WeightKind,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub right_power: f64,
    #[arg(long, default_value = "ac")]
    pub projection: String,
    #[arg(long, value_enum, default_value = "generic")]
    pub case: CaseArg,
}

#[derive(Debug, Args, Serialize)]
pub struct ConjectureArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 4.0)]
    pub q: f64,
    #[command(flatten)]
    pub times: Times,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long = "t", default_value_t = 1.0)]
    pub t: f64,
    /// Nodes per side; defaults to the config box or 24.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub half_extent: f64,
    #[arg(long, default_value_t = 0.2)]
    pub width2: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

/// Provenance written next to every result.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub parameters: Value,
}

/// What a subcommand produced.
struct Outcome {
    result: Value,
    tables: Vec<(String, String)>,
    /// `false` when a checked tolerance was missed.
    passed: bool,
}

impl Outcome {
    fn new(result: Value) -> Self {
        Outcome {
            result,
            tables: Vec::new(),
            passed: true,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn load_config(path: Option<&Path>) -> Result<Option<ConfigFile>> {
    path.map(|p| {
        let text = fs::read_to_string(p).map_err(|e| Error::ConfigParse(format!("{}: {e}", p.display())))?;
        ConfigFile::parse(&text)
    })
    .transpose()
}

fn interaction(c: &Coupling, file: Option<&ConfigFile>) -> Result<InteractionConfig> {
    match (&c.alpha, file) {
        (Some(a), _) => Ok(InteractionConfig::single(a.parse::<Strength>()?)),
        (None, Some(f)) => f.interaction(),
        (None, None) => Err(Error::InvalidArgument("need --alpha or --config".into())),
    }
}

fn parse_exponent(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .or_else(|| pitt::parse_rational(t).ok().map(|r| *r.numer() as f64 / *r.denom() as f64))
            .ok_or_else(|| Error::InvalidArgument(format!("bad exponent {t:?}"))),
    }
}

fn csv<I: IntoIterator<Item = Vec<String>>>(header: &str, rows: I) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn spectrum(a: &SpectrumArgs, file: Option<&ConfigFile>) -> Result<Outcome> {
    let cfg = interaction(&a.scan.coupling, file)?;
    let lambda_max = a.lambda_max.unwrap_or_else(|| gamma::default_lambda_max(&cfg));
    let rep = gamma::spectral_report(&cfg, lambda_max, a.scan.z_max, a.scan.samples, a.scan.threshold)?;
    let mut out = Outcome::new(json!({
        "poles": rep.poles.iter().map(|p| p.lambda).collect::<Vec<_>>(),
        "eigenvalues": rep.eigenvalues,
        "multiplicities": rep.poles.iter().map(|p| p.multiplicity).collect::<Vec<_>>(),
        "assumption1_ok": rep.scan.assumption1_ok,
        "min_singular_value": rep.scan.min_singular_value,
        "threshold": rep.scan.threshold,
        "lambda_max": lambda_max,
    }));
    out.tables.push(scan_table(&rep.scan));
    Ok(out)
}

fn scan_table(scan: &gamma::AssumptionScan) -> (String, String) {
    (
        "scan".into(),
        csv("z,sigma_min", scan.profile.iter().map(|(z, s)| vec![z.to_string(), s.to_string()])),
    )
}

fn assumption_scan(a: &ScanArgs, file: Option<&ConfigFile>) -> Result<Outcome> {
    let cfg = interaction(&a.coupling, file)?;
    let scan = gamma::assumption1_scan(&cfg, a.z_max, a.samples, a.threshold)?;
    let mut out = Outcome::new(json!({
        "assumption1_ok": scan.assumption1_ok,
        "min_singular_value": scan.min_singular_value,
        "threshold": scan.threshold,
    }));
    out.passed = scan.assumption1_ok;
    out.tables.push(scan_table(&scan));
    Ok(out)
}

fn resolvent_check(a: &ResolventArgs, file: Option<&ConfigFile>, seed: u64) -> Result<Outcome> {
    let cfg = interaction(&a.coupling, file)?;
    let draws = resolvent::resolvent_identity_checks(&cfg, seed, a.count)?;
    let worst = draws
        .iter()
        .max_by(|x, y| x.residual.total_cmp(&y.residual))
        .ok_or_else(|| Error::InvalidArgument("--count must be positive".into()))?;
    let mut out = Outcome::new(json!({
        "residual": worst.residual,
        "z1": to_value(&worst.z1),
        "z2": to_value(&worst.z2),
        "seed": seed,
        "tolerance": a.tolerance,
        "draws": to_value(&draws),
    }));
    out.passed = worst.residual < a.tolerance;
    Ok(out)
}

fn bethe_peierls(a: &BetheArgs, file: Option<&ConfigFile>) -> Result<Outcome> {
    let cfg = interaction(&a.coupling, file)?;
    let z = C64::new(0.0, a.z_im);
    let phi = RadialSum::gaussian([0.0; 3], C64::new(1.0, 0.0), a.width);
    let elem = resolvent::build_domain_element(&cfg, z, Arc::new(phi))?;
    let fits = resolvent::bethe_peierls_extract(&elem, &cfg)?;
    let (_, alphas) = cfg.active();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut passed = true;
    for (j, (fit, alpha)) in fits.iter().zip(&alphas).enumerate() {
        let est = fit.alpha_estimate();
        let rel = (est.re - alpha).abs() / alpha.abs().max(1e-300);
        passed &= rel < a.tolerance;
        entries.push(json!({
            "center": elem.centers[j],
            "alpha": alpha,
            "c": to_value(&fit.c),
            "b": to_value(&fit.b),
            "b_over_4pi_c": to_value(&est),
            "relative_error": rel,
            "fit_residual": fit.residual,
        }));
        rows.push(vec![
            j.to_string(),
            fit.c.re.to_string(),
            fit.c.im.to_string(),
            fit.b.re.to_string(),
            fit.b.im.to_string(),
            est.re.to_string(),
            alpha.to_string(),
        ]);
    }
    let mut out = Outcome::new(json!({ "centers": entries, "tolerance": a.tolerance }));
    out.passed = passed;
    out.tables.push(("bethe_peierls".into(), csv("center,c_re,c_im,b_re,b_im,estimate,alpha", rows)));
    Ok(out)
}

fn evolve_cmd(a: &EvolveArgs, file: Option<&ConfigFile>) -> Result<Outcome> {
    let cfg = interaction(&a.coupling, file)?;
    let data = GaussianData { width2: a.width2 };
    let f = data.sample();
    let mut opts = data.options();
    if let Some(k) = a.k_max {
        opts.k_max = k;
    }
    let projection: Projection = a.projection.parse()?;
    let mut out = Outcome::new(Value::Null);
    let mut runs = Vec::new();
    for &t in &a.times {
        let mut req = EvolutionRequest::new(cfg.clone(), f.clone(), t)
            .projection(projection)
            .options(opts);
        if let Some(r) = a.r_fixed {
            req = req.r_policy(RPolicy::Fixed(r));
        }
        req.s_cut = a.s_cut;
        let res = evolve(&req)?;
        runs.push(json!({
            "t": t,
            "case": to_value(&res.case),
            "meta": to_value(&res.meta),
            "l2_initial": f.l2_norm(),
            "l2_final": res.output.l2_norm(),
        }));
        let rows = res
            .output
            .grid
            .nodes()
            .iter()
            .zip(&res.output.values)
            .map(|(r, u)| vec![r.to_string(), u.re.to_string(), u.im.to_string()]);
        out.tables.push((format!("evolve_t{t}"), csv("r,re_u,im_u", rows)));
    }
    out.result = json!({ "width2": a.width2, "options": to_value(&opts), "runs": runs });
    Ok(out)
}

fn norm_cmd(a: &NormArgs) -> Result<Outcome> {
    let exponent = parse_exponent(&a.exponent)?;
    let w = weighting(a.weight, a.power, a.weight_q);
    let (f, base): (Box<dyn Fn(f64) -> C64>, RadialGrid) = match a.profile {
        Profile::Gaussian => {
            let s2 = a.width2;
            (
                Box::new(move |r| C64::new((-r * r / s2).exp(), 0.0)),
                RadialGrid::geometric_uniform(1e-3, 8.0 * s2.sqrt(), 0.05),
            )
        }
        Profile::Green => {
            let lam = a.param;
            (
                Box::new(move |r| green_tilde(C64::new(0.0, lam), r)),
                RadialGrid::geometric_uniform(1e-3, 40.0 / lam, 0.1),
            )
        }
        Profile::BoundState => {
            let alpha = a.param;
            if alpha >= 0.0 {
                return Err(Error::PositiveAlpha(alpha));
            }
            (
                Box::new(move |r| C64::new(bound_state_value(alpha, r), 0.0)),
                RadialGrid::geometric_uniform(1e-3, 40.0 / (4.0 * std::f64::consts::PI * alpha.abs()), 0.02),
            )
        }
    };
    let rep = norms::refinement_study(&*f, &base, exponent, &w, a.flavor.into(), a.levels.max(1))?;
    Ok(Outcome::new(json!({
        "value": rep.values.last().cloned().flatten(),
        "refinement": to_value(&rep),
        "weight": to_value(&w),
    })))
}

fn pitt_cmd(a: &PittArgs, seed: u64) -> Result<Outcome> {
    let r = |s: &Option<String>, name: &str| -> Result<pitt::Q> {
        pitt::parse_rational(s.as_deref().ok_or_else(|| Error::InvalidArgument(format!("missing --{name}")))?)
    };
    if a.p.is_some() || a.q.is_some() {
        let q = r(&a.q, "q")?;
        let p = match &a.p {
            Some(_) => r(&a.p, "p")?,
            None => q / (q - pitt::Q::from_integer(1)),
        };
        if q >= pitt::Q::from_integer(3) {
            // The inequality is not available; show how the ratio behaves.
            pitt::PittParams::dictionary_check(p, q)?;
            let family = [2.0, 4.0, 8.0, 16.0, 32.0];
            let demo = pitt::pitt_blowup_demo(q, &family, &pitt::XiGrid::default())?;
            let mut out = Outcome::new(json!({
                "regime": "unbounded",
                "max_ratio": demo.ratios.last(),
                "refinement_delta": Value::Null,
                "growth": demo.growth,
                "demo": to_value(&demo),
            }));
            out.tables.push((
                "pitt_family".into(),
                csv("n,ratio", demo.family.iter().zip(&demo.ratios).map(|(n, v)| vec![n.to_string(), v.to_string()])),
            ));
            return Ok(out);
        }
        return pitt_scan_outcome(pitt::pitt_scan(seed, a.count, p, q, a.levels)?);
    }
    let params = pitt::PittParams::new(r(&a.gamma, "gamma")?, r(&a.eta, "eta")?, r(&a.b, "b")?)?;
    pitt_scan_outcome(pitt::scan_with(params, seed, a.count, a.levels)?)
}

fn pitt_scan_outcome(scan: pitt::PittScan) -> Result<Outcome> {
    let rows = scan
        .functions
        .iter()
        .zip(&scan.ratios)
        .enumerate()
        .map(|(i, (f, v))| vec![i.to_string(), f.kind().to_string(), v.to_string()]);
    let table = csv("index,kind,ratio", rows);
    let mut out = Outcome::new(json!({
        "max_ratio": scan.max_ratio,
        "refinement_delta": scan.refinement_delta,
        "regime": scan.regime,
        "max_by_level": scan.max_by_level,
        "params": to_value(&scan.params),
        "seed": scan.seed,
        "corpus_version": scan.corpus_version,
        "corpus": to_value(&scan.functions),
    }));
    out.tables.push(("pitt_ratios".into(), table));
    Ok(out)
}

fn decay_table_csv(t: &decay::DecayTable) -> String {
    t.to_csv()
}

fn decay_cmd(a: &DecayArgs) -> Result<Outcome> {
    let alpha: Strength = a.alpha.parse()?;
    let cfg = InteractionConfig::single(alpha);
    let mut preset = match &a.preset {
        Some(name) => Preset::build(name, a.q, a.eps)?,
        None => {
            let q = a.q.ok_or_else(|| Error::InvalidArgument("need --preset or --q".into()))?;
            let case = match a.case {
                CaseArg::Generic => DecayCase::Generic,
                CaseArg::Resonant => DecayCase::Resonant,
                CaseArg::ResonantEndpoint => DecayCase::ResonantEndpoint,
            };
            Preset {
                name: "CUSTOM".into(),
                description: "explicit norm pair".into(),
                alpha: decay::AlphaRequirement::Any,
                p: decay::dual(q),
                q,
                left: weighting(a.left_weight, a.left_power, q),
                left_flavor: a.left_flavor.into(),
                right: weighting(a.right_weight, a.right_power, q),
                projection: a.projection.parse()?,
                case,
                tolerance: 0.05,
                exploratory: false,
            }
        }
    };
    if let Some(tol) = a.tolerance {
        preset.tolerance = tol;
    }
    let data = GaussianData { width2: a.times.width2 };
    let times = decay::dyadic_times(a.times.t_min_exp, a.times.t_max_exp);
    let run = decay::run_preset(&cfg, &preset, &data, &times)?;
    let mut out = Outcome::new(json!({
        "slope": run.fit.slope,
        "stderr": run.fit.stderr,
        "predicted": run.fit.predicted,
        "verdict": to_value(&run.fit.verdict),
        "preset": to_value(&run.preset),
        "fit": to_value(&run.fit),
        "alpha": alpha.to_string(),
        "data": to_value(&run.data),
        "case": to_value(&run.table.case),
        "excluded": to_value(&run.table.excluded),
    }));
    out.passed = run.fit.verdict == Verdict::Pass;
    out.tables.push(("decay_table".into(), decay_table_csv(&run.table)));
    Ok(out)
}

fn conjecture_cmd(a: &ConjectureArgs) -> Result<Outcome> {
    let data = GaussianData { width2: a.times.width2 };
    let times = decay::dyadic_times(a.times.t_min_exp, a.times.t_max_exp);
    let entries = decay::conjecture_scan(a.alpha, a.q, &data, &times)?;
    let mut out = Outcome::new(Value::Null);
    let mut summary = Vec::new();
    for e in &entries {
        let fit = e.fit.as_ref();
        summary.push(json!({
            "label": e.label,
            "slope": fit.map(|f| f.slope),
            "stderr": fit.map(|f| f.stderr),
            "predicted": e.preset.predicted().ok(),
            "verdict": fit.map(|f| to_value(&f.verdict)),
            "exploratory": true,
            "flags": e.flags,
            "preset": to_value(&e.preset),
        }));
        let name: String = e
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
            .collect();
        out.tables.push((format!("conjecture_{name}"), decay_table_csv(&e.table)));
    }
    out.result = json!({ "label": "EXPLORATORY", "alpha": a.alpha, "q": a.q, "entries": summary });
    Ok(out)
}

fn oracle_cmd(a: &OracleArgs, file: Option<&ConfigFile>) -> Result<Outcome> {
    let n = a.n.or(file.map(|f| f.oracle_box.n)).unwrap_or(24);
    let rep = propagator::oracle_compare(n, a.half_extent, a.width2, a.t, &PropagatorOptions::default())?;
    let mut out = Outcome::new(json!({ "report": to_value(&rep), "tolerance": a.tolerance }));
    out.passed = rep.relative_l2 < a.tolerance;
    Ok(out)
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum(_) => "spectrum",
        Command::AssumptionScan(_) => "assumption-scan",
        Command::ResolventCheck(_) => "resolvent-check",
        Command::BethePeierls(_) => "bethe-peierls",
        Command::Evolve(_) => "evolve",
        Command::Norm(_) => "norm",
        Command::Pitt(_) => "pitt",
        Command::DecayFit(_) => "decay-fit",
        Command::Conjecture(_) => "conjecture",
        Command::OracleCompare(_) => "oracle-compare",
    }
}

fn parameters(c: &Command) -> Value {
    match c {
        Command::Spectrum(a) => to_value(a),
        Command::AssumptionScan(a) => to_value(a),
        Command::ResolventCheck(a) => to_value(a),
        Command::BethePeierls(a) => to_value(a),
        Command::Evolve(a) => to_value(a),
        Command::Norm(a) => to_value(a),
        Command::Pitt(a) => to_value(a),
        Command::DecayFit(a) => to_value(a),
        Command::Conjecture(a) => to_value(a),
        Command::OracleCompare(a) => to_value(a),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let file = load_config(cli.config.as_deref())?;
    let file = file.as_ref();
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, file),
        Command::AssumptionScan(a) => assumption_scan(a, file),
        Command::ResolventCheck(a) => resolvent_check(a, file, cli.seed),
        Command::BethePeierls(a) => bethe_peierls(a, file),
        Command::Evolve(a) => evolve_cmd(a, file),
        Command::Norm(a) => norm_cmd(a),
        Command::Pitt(a) => pitt_cmd(a, cli.seed),
        Command::DecayFit(a) => decay_cmd(a),
        Command::Conjecture(a) => conjecture_cmd(a),
        Command::OracleCompare(a) => oracle_cmd(a, file),
    }
}

fn write_bundle(dir: &Path, sub: &str, manifest: &Value, bundle: &Value, tables: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest).unwrap() + "\n")?;
    fs::write(dir.join(format!("{sub}.json")), serde_json::to_string_pretty(bundle).unwrap() + "\n")?;
    for (name, body) in tables {
        fs::write(dir.join(format!("{name}.csv")), body)?;
    }
    Ok(())
}

/// Run one command line. Exit codes: 0 success, 2 when a checked tolerance
/// or verdict fails, 1 on errors (including unknown subcommands).
pub fn run<I, T>(argv: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    let sub = subcommand_name(&cli.command);
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        subcommand: sub.to_string(),
        config_path: cli.config.clone(),
        seed: cli.seed,
        out_dir: cli.out.clone(),
        parameters: parameters(&cli.command),
    };
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let manifest = to_value(&manifest);
    let bundle = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest,
        "result": outcome.result,
        "passed": outcome.passed,
    });
    if let Some(dir) = &cli.out {
        if let Err(e) = write_bundle(dir, sub, &manifest, &bundle, &outcome.tables) {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    }
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&bundle).unwrap());
    if outcome.passed {
        0
    } else {
        2
    }
}
