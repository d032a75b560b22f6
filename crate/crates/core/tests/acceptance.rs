//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use pointdisp::decay::*;
use pointdisp::gamma::{self, bound_state_value};
use pointdisp::norms::{Flavor, Weighting};
use pointdisp::pitt::{parse_rational, pitt_blowup_demo, pitt_scan, XiGrid};
use pointdisp::propagator::*;
use pointdisp::resolvent::{self, RadialSum};
use pointdisp::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Result<Outcome>);

fn times() -> Vec<f64> {
    dyadic_times(0, 6)
}

fn preset_slope(alpha: f64, name: &str, q: Option<f64>) -> Result<DecayFit> {
    let preset = Preset::build(name, q, None)?;
    let cfg = InteractionConfig::single(alpha);
    Ok(run_preset(&cfg, &preset, &GaussianData::default(), &times())?.fit)
}

fn fmt_fit(fit: &DecayFit) -> String {
    format!("slope {:.4} ± {:.4}", fit.slope, fit.stderr)
}

fn exact_eigenvalue() -> Result<Outcome> {
    let cfg = InteractionConfig::single(-1.0);
    let rep = gamma::spectral_report(&cfg, gamma::default_lambda_max(&cfg), 50.0, 201, 1e-6)?;
    let expected = -(4.0 * PI).powi(2);
    let ok = rep.eigenvalues.len() == 1 && (rep.eigenvalues[0] - expected).abs() < 1e-8;
    Ok((ok, format!("eigenvalues {:?}, expected {expected:.10}", rep.eigenvalues)))
}

fn bound_state_normalization() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for alpha in [-0.1f64, -1.0, -5.0] {
        let decay = 8.0 * PI * alpha.abs();
        let grid = RadialGrid::geometric_uniform(1e-13, 60.0 / decay, 0.25 / decay);
        let psi = RadialFunction::from_real_fn(&grid, |r| bound_state_value(alpha, r));
        worst = worst.max((psi.l2_norm() - 1.0).abs());
    }
    Ok((worst < 1e-8, format!("max |‖ψ‖₂ − 1| = {worst:.2e}")))
}

fn free_slope() -> Result<Outcome> {
    let data = GaussianData::default();
    let setup = NormSetup {
        p: 1.0,
        q: f64::INFINITY,
        left: Weighting::unit(),
        left_flavor: Flavor::Strong,
        right: Weighting::unit(),
        projection: Projection::Full,
    };
    let cfg = InteractionConfig::single(f64::INFINITY);
    let table = run_decay(&cfg, &data.sample(), &setup, &times(), &data.options())?;
    let fit = fit_decay(&table, None, -1.5, 0.05)?;
    Ok((fit.verdict == Verdict::Pass, format!("{} vs −1.5 ± 0.05", fmt_fit(&fit))))
}

fn unweighted(alpha: f64) -> Result<Outcome> {
    let fit = preset_slope(alpha, "PRESET-23", Some(2.5))?;
    let ok = (fit.slope + 0.3).abs() < 0.05;
    Ok((ok, format!("α = {alpha}: {} vs −0.3 ± 0.05", fmt_fit(&fit))))
}

fn weighted_endpoint() -> Result<Outcome> {
    let resonant = preset_slope(0.0, "PRESET-18", None)?;
    let generic = preset_slope(1.0, "PRESET-16", None)?;
    let gap = resonant.slope - generic.slope;
    let ok = (resonant.slope + 0.5).abs() < 0.05 && (generic.slope + 1.5).abs() < 0.1 && (gap - 1.0).abs() < 0.1;
    Ok((
        ok,
        format!(
            "α = 0 {} vs −0.5 ± 0.05; α = 1 {} vs −1.5 ± 0.1; gap {gap:.4} vs 1.0 ± 0.1",
            fmt_fit(&resonant),
            fmt_fit(&generic)
        ),
    ))
}

fn gaussian() -> RadialFunction {
    let grid = RadialGrid::geometric_uniform(1e-3, 8.0, 0.125);
    RadialFunction::from_real_fn(&grid, |r| (-r * r).exp())
}

fn unitarity() -> Result<Outcome> {
    let f = gaussian();
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0, -1.0] {
        for t in [0.5, 1.0, 2.0, 4.0] {
            let out = evolve(&EvolutionRequest::new(InteractionConfig::single(alpha), f.clone(), t))?;
            worst = worst.max((out.output.l2_norm() / f.l2_norm() - 1.0).abs());
        }
    }
    Ok((worst < 1e-4, format!("max relative L² drift {worst:.2e}")))
}

fn r_uniformity() -> Result<Outcome> {
    let f = gaussian();
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0, -1.0] {
        let cfg = InteractionConfig::single(alpha);
        let base = evolve(&EvolutionRequest::new(cfg.clone(), f.clone(), 1.0))?;
        let r = base.meta.r_used.ok_or_else(|| Error::InvalidArgument("no R recorded".into()))?;
        let doubled = evolve(&EvolutionRequest::new(cfg, f.clone(), 1.0).r_policy(RPolicy::Fixed(2.0 * r)))?;
        worst = worst.max(base.output.sub(&doubled.output).l2_norm() / f.l2_norm());
    }
    Ok((worst < 1e-6, format!("max relative change under R doubling {worst:.2e}")))
}

fn oracle() -> Result<Outcome> {
    let rep = oracle_compare(24, 2.0, 0.2, 1.0, &PropagatorOptions::default())?;
    Ok((rep.relative_l2 < 1e-6, format!("relative L² error {:.2e} on 24³", rep.relative_l2)))
}

fn resolvent_identity() -> Result<Outcome> {
    let cfg = InteractionConfig::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.5.into(), (-0.2).into()])?;
    let checks = resolvent::resolvent_identity_checks(&cfg, 7, 10)?;
    let worst = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok((checks.len() == 10 && worst < 1e-6, format!("max residual {worst:.2e} over {} draws", checks.len())))
}

fn bethe_peierls() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for alpha in [-1.0, 0.5, 2.0] {
        let cfg = InteractionConfig::single(alpha);
        let phi = RadialSum::gaussian([0.0; 3], C64::new(1.0, 0.0), 1.0);
        let elem = resolvent::build_domain_element(&cfg, C64::new(0.0, 1.0), std::sync::Arc::new(phi))?;
        let est = resolvent::bethe_peierls_extract(&elem, &cfg)?[0].alpha_estimate();
        worst = worst.max((est.re - alpha).abs() / alpha.abs());
    }
    Ok((worst < 0.01, format!("max relative error of b/(4πc) {worst:.2e}")))
}

fn pitt_split() -> Result<Outcome> {
    let scan = pitt_scan(2024, 30, parse_rational("5/3")?, parse_rational("5/2")?, 3)?;
    let stable = scan.refinement_delta < 0.05;
    let demo = pitt_blowup_demo(parse_rational("7/2")?, &[2.0, 4.0, 8.0, 16.0, 32.0], &XiGrid::default())?;
    let grows = demo.strictly_increasing && demo.growth > 10.0;
    Ok((
        stable && grows,
        format!(
            "(a) q = 5/2 max {:.4?} drift {:.1e} [{}]; (b) q = 7/2 ratios {:.3?} growth {:.3}× vs > 10× [{}]",
            scan.max_by_level,
            scan.refinement_delta,
            if stable { "ok" } else { "fail" },
            demo.ratios,
            demo.growth,
            if grows { "ok" } else { "fail" }
        ),
    ))
}

/// Sum of off-center Gaussians with random amplitudes, or its odd part.
fn random_field(rng: &mut ChaCha8Rng, odd: bool) -> Field3D {
    let bumps: Vec<(Point3, C64, f64)> = (0..3)
        .map(|_| {
            let c = [0; 3].map(|_| rng.random_range(-1.0..1.0));
            let a = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (c, a, rng.random_range(0.5..1.0))
        })
        .collect();
    let g = move |x: &Point3| -> C64 {
        bumps
            .iter()
            .map(|(c, a, w)| {
                let d2: f64 = (0..3).map(|k| (x[k] - c[k]).powi(2)).sum();
                a * (-d2 / w).exp()
            })
            .sum()
    };
    Field3D::cube(4.0, 24, |x| if odd { g(x) - g(&[-x[0], -x[1], -x[2]]) } else { g(x) })
}

fn radial_contraction() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let f = random_field(&mut rng, false);
        let (f1, _) = project_radial(&f);
        let on_box = f.like(|x| f1.eval(config::norm3(x)));
        for p in [1.0, 5.0 / 3.0, 2.0] {
            worst = worst.max(on_box.lp_norm(p) / f.lp_norm(p));
        }
    }
    let contract = worst <= 1.0;

    let cfg = InteractionConfig::single(1.0);
    let opts = PropagatorOptions::default();
    let mut sector: f64 = 0.0;
    for _ in 0..3 {
        let f = random_field(&mut rng, true);
        let out = evolve_general(&cfg, &f, 0.5, Projection::Full, &opts)?;
        let free = free_propagator_3d_oracle(&f, 0.5)?;
        sector = sector.max(out.zip_with(&free, |a, b| a - b).l2_norm() / free.l2_norm());
    }
    Ok((
        contract && sector < 1e-6,
        format!("max ‖f₁‖_p/‖f‖_p {worst:.4} over 50 fields; non-radial vs oracle {sector:.2e}"),
    ))
}

fn flatness() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0, -1.0] {
        worst = worst.max(preset_slope(alpha, "PRESET-23", Some(2.0))?.slope.abs());
    }
    Ok((worst < 0.01, format!("max |slope| {worst:.2e}")))
}

fn main() {
    let criteria: [Criterion; 14] = [
        ("1", exact_eigenvalue),
        ("2", bound_state_normalization),
        ("3", free_slope),
        ("4", || unweighted(1.0)),
        ("5", || unweighted(0.0)),
        ("6", weighted_endpoint),
        ("7", unitarity),
        ("8", r_uniformity),
        ("9", oracle),
        ("10", resolvent_identity),
        ("11", bethe_peierls),
        ("12", pitt_split),
        ("13", radial_contraction),
        ("14", flatness),
    ];
    let mut failed = Vec::new();
    for (id, check) in criteria {
        let start = Instant::now();
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        println!("{} criterion {id}: {detail} ({secs:.1} s)", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 14 criteria pass");
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}
