use pointdisp::pitt::{
    concentrating_member, parse_rational, pitt_blowup_demo, pitt_scan, xi_cutoff_sweep, XiGrid,
};

#[test]
fn corpus_maximum_is_refinement_stable() {
    let scan = pitt_scan(2024, 30, parse_rational("5/3").unwrap(), parse_rational("5/2").unwrap(), 3).unwrap();
    eprintln!("{:?} delta {}", scan.max_by_level, scan.refinement_delta);
    assert!(scan.refinement_delta < 0.05);
    assert!(scan.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
}

#[test]
fn concentrating_family_growth_matches_scaling() {
    let q = parse_rational("7/2").unwrap();
    let demo = pitt_blowup_demo(q, &[2.0, 4.0, 8.0, 16.0, 32.0], &XiGrid::default()).unwrap();
    eprintln!("{:?} growth {}", demo.ratios, demo.growth);
    assert!(demo.strictly_increasing);
    // Exact scaling predicts growth 16^{(q−3)/q}.
    let predicted = 16f64.powf(0.5 / 3.5);
    assert!((demo.growth / predicted - 1.0).abs() < 0.05, "{} vs {predicted}", demo.growth);
}

#[test]
fn lower_cutoff_drives_divergence_above_three() {
    let h = concentrating_member(1.0, 0.02);
    let cut = [1e-2, 1e-3, 1e-4, 1e-5];
    let above = xi_cutoff_sweep(parse_rational("7/2").unwrap(), &h, &cut).unwrap();
    let below = xi_cutoff_sweep(parse_rational("5/2").unwrap(), &h, &cut).unwrap();
    eprintln!("{above:?} {below:?}");
    assert!(above.windows(2).all(|w| w[1] > 1.2 * w[0]));
    assert!((below[3] / below[2] - 1.0).abs() < 1e-3);
}
