use pointdisp::gamma::bound_state_value;
use pointdisp::propagator::*;
use pointdisp::*;

fn gaussian() -> RadialFunction {
    let grid = RadialGrid::geometric_uniform(1e-3, 8.0, 0.125);
    RadialFunction::from_real_fn(&grid, |r| (-r * r).exp())
}

fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn full_evolution_is_unitary_in_every_case() {
    let f = gaussian();
    for &alpha in &[0.0, 1.0, -1.0] {
        for &t in &[0.5, 1.0, 2.0, 4.0] {
            let out = evolve(&EvolutionRequest::new(InteractionConfig::single(alpha), f.clone(), t)).unwrap();
            let rel = (out.output.l2_norm() / f.l2_norm() - 1.0).abs();
            assert!(rel < 1e-4, "α = {alpha}, t = {t}: {rel:e}");
        }
    }
}

#[test]
fn bound_state_acquires_only_a_phase() {
    let alpha = -1.0;
    let grid = RadialGrid::geometric_uniform(1e-9, 6.0, 0.05);
    let psi = RadialFunction::from_real_fn(&grid, |r| bound_state_value(alpha, r));
    let t = 1.0;
    let out = evolve(&EvolutionRequest::new(InteractionConfig::single(alpha), psi.clone(), t)).unwrap();
    let kappa = 4.0 * std::f64::consts::PI * alpha;
    let phase = C64::cis(t * kappa * kappa);
    let expected: Vec<C64> = out.output.grid.nodes().iter().map(|&r| phase * bound_state_value(alpha, r)).collect();
    assert!(max_abs_diff(&out.output.values, &expected) < 1e-6);

    let ac = evolve(&EvolutionRequest::new(InteractionConfig::single(alpha), psi, t).projection(Projection::Ac)).unwrap();
    assert!(ac.output.l2_norm() < 1e-8, "{:e}", ac.output.l2_norm());
}

#[test]
fn orthogonal_data_has_no_bound_state_component() {
    let cfg = InteractionConfig::single(-1.0);
    let f = project_ac(&cfg, &gaussian()).unwrap();
    let out = evolve(&EvolutionRequest::new(cfg, f, 1.0)).unwrap();
    assert!(out.meta.bound_overlap.unwrap().norm() < 1e-10);
}

#[test]
fn evolution_is_linear() {
    let f = gaussian();
    let g = f.map(|r, _| C64::new(0.0, r * (-2.0 * r * r).exp()));
    let (a, b) = (C64::new(0.3, -1.2), C64::new(2.0, 0.5));
    let combo = f.scale(a).add(&g.scale(b));
    for &alpha in &[0.0, 1.0, -1.0] {
        let radii: Vec<f64> = (1..80).map(|k| 0.1 * k as f64).collect();
        let run = |h: &RadialFunction| {
            let req = EvolutionRequest::new(InteractionConfig::single(alpha), h.clone(), 1.0).r_policy(RPolicy::Fixed(8.0));
            evolve_at(&req, &radii).unwrap()
        };
        let lhs = run(&combo);
        let (rf, rg) = (run(&f), run(&g));
        let rhs: Vec<C64> = rf.iter().zip(&rg).map(|(x, y)| a * x + b * y).collect();
        let scale = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12 * scale, "α = {alpha}");
    }
}

#[test]
fn free_flow_composes_in_time() {
    let f = gaussian();
    let opts = PropagatorOptions::default();
    let (t, s) = (0.5, 0.75);
    let half = free_propagator_radial(&f, t, &opts).unwrap();
    let radii: Vec<f64> = (1..60).map(|k| 0.1 * k as f64).collect();
    let composed = free_propagator_radial_at(&half, s, &radii, &opts).unwrap();
    let direct = free_propagator_radial_at(&f, t + s, &radii, &opts).unwrap();
    assert!(max_abs_diff(&composed, &direct) < 1e-6);
}

#[test]
fn strong_repulsion_approaches_free_flow() {
    let f = gaussian();
    let free = free_propagator_radial(&f, 1.0, &PropagatorOptions::default()).unwrap();
    let mut prev = f64::INFINITY;
    for &alpha in &[10.0, 100.0, 1000.0] {
        let out = evolve(&EvolutionRequest::new(InteractionConfig::single(alpha), f.clone(), 1.0)).unwrap();
        let dist = (0..free.values.len())
            .map(|i| (out.output.values[i] - free.values[i]).norm_sqr() * free.grid.volume_weight(i))
            .sum::<f64>()
            .sqrt();
        assert!(dist < prev * 0.2, "α = {alpha}: {dist} vs {prev}");
        prev = dist;
    }
}

#[test]
fn s_cut_doubling_is_invisible() {
    let f = gaussian();
    let opts = PropagatorOptions::default();
    for &alpha in &[1.0, -1.0] {
        let s = default_s_cut(alpha);
        let radii: Vec<f64> = (1..50).map(|k| 0.2 * k as f64).collect();
        let run = |s_cut: f64| {
            let mut req = EvolutionRequest::new(InteractionConfig::single(alpha), f.clone(), 1.0).r_policy(RPolicy::Fixed(6.0));
            req.s_cut = Some(s_cut);
            evolve_at(&req, &radii).unwrap()
        };
        let (va, vb) = (run(s), run(2.0 * s));
        assert!(max_abs_diff(&va, &vb) < 1e-10, "α = {alpha}");
        assert!(s_tail_bound(alpha, s) <= 1e-12 / (4.0 * std::f64::consts::PI) * 1.0001);
    }
    let short = m_alpha_pos_correction(&f, 1.0, 4.0, 0.1, 1.0, &opts);
    assert!(matches!(short, Err(Error::TailTooLarge(_))));
}

#[test]
fn corrections_are_stable_under_r_doubling() {
    let f = gaussian();
    for &alpha in &[0.0, 1.0, -1.0] {
        let cfg = InteractionConfig::single(alpha);
        let base = evolve(&EvolutionRequest::new(cfg.clone(), f.clone(), 1.0)).unwrap();
        let r = base.meta.r_used.unwrap();
        let doubled = evolve(&EvolutionRequest::new(cfg, f.clone(), 1.0).r_policy(RPolicy::Fixed(2.0 * r))).unwrap();
        let change = base.output.sub(&doubled.output).l2_norm();
        assert!(change < 1e-6 * f.l2_norm(), "α = {alpha}: {change:e}");
    }
}

#[test]
fn radial_route_matches_box_oracle() {
    // Narrow Gaussian so the box truncation and the aliasing of the discrete
    // kernel sum both sit far below the tolerance.
    let rep = oracle_compare(24, 2.0, 0.2, 1.0, &PropagatorOptions::default()).unwrap();
    assert!(rep.relative_l2 < 1e-6, "relative L² error {:e}", rep.relative_l2);
}

#[test]
fn non_radial_sector_follows_free_flow() {
    let f = Field3D::cube(3.0, 20, |x| C64::new(x[2] * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0));
    let cfg = InteractionConfig::single(1.0);
    let out = evolve_general(&cfg, &f, 0.5, Projection::Full, &PropagatorOptions::default()).unwrap();
    let free = free_propagator_3d_oracle(&f, 0.5).unwrap();
    let diff = out.zip_with(&free, |a, b| a - b).l2_norm();
    assert!(diff < 1e-10 * free.l2_norm(), "{diff:e}");
}

#[test]
fn radial_box_data_matches_radial_evolution() {
    let f = Field3D::cube(3.0, 20, |x| C64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0));
    let cfg = InteractionConfig::single(1.0);
    let opts = PropagatorOptions::default();
    let out = evolve_general(&cfg, &f, 0.5, Projection::Full, &opts).unwrap();
    let radii: Vec<f64> = (0..f.len()).map(|i| config::norm3(&f.point(i))).collect();
    let exact = evolve_at(&EvolutionRequest::new(cfg, gaussian(), 0.5), &radii).unwrap();
    let num: f64 = out.values.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = exact.iter().map(|a| a.norm_sqr()).sum();
    assert!((num / den).sqrt() < 1e-2, "{}", (num / den).sqrt());
}
