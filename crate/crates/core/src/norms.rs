//! Strong and weak-Lorentz norms of radial and boxed samples, with optional
//! weights `w^power`, and a refinement study that flags divergent norms.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{evaluate_weight, Point3, WeightSpec};
use crate::error::{Error, Result};
use crate::grid::{core_integral, Field3D, RadialFunction, RadialGrid};
use crate::propagator::SphereRule;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Flavor {
    Strong,
    WeakLorentz,
}

/// `w^power` applied to the function before taking a norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weighting {
    pub weight: WeightSpec,
    pub power: f64,
}

impl Weighting {
    pub fn unit() -> Self {
        Weighting {
            weight: WeightSpec::Unit,
            power: 0.0,
        }
    }

    pub fn new(weight: WeightSpec, power: f64) -> Self {
        Weighting { weight, power }
    }

    fn is_trivial(&self) -> bool {
        self.power == 0.0 || self.weight == WeightSpec::Unit
    }

    /// True when the weight depends on `|x|` only.
    fn radial(&self) -> bool {
        let o = [0.0; 3];
        match &self.weight {
            WeightSpec::Unit => true,
            WeightSpec::SingularSum { centers } => centers.iter().all(|c| *c == o),
            WeightSpec::ConjQ { center, .. } | WeightSpec::LocalCutoff { center, .. } => *center == o,
        }
    }

    pub fn at(&self, x: &Point3) -> Result<f64> {
        evaluate_weight(&self.weight, x, self.power)
    }

    /// Effective radial factor `ω(r)` with `∫|w^a f|^p = ∫ ω(r)^p |f̃(r)|^p`
    /// for radial `f`; non-radial weights are averaged over the sphere.
    fn radial_factor(&self, r: f64, p: f64, rule: &SphereRule) -> Result<f64> {
        if self.is_trivial() {
            return Ok(1.0);
        }
        if self.radial() {
            return self.at(&[r, 0.0, 0.0]);
        }
        if p.is_infinite() {
            let mut m = 0.0f64;
            for d in &rule.dirs {
                m = m.max(self.at(&[r * d[0], r * d[1], r * d[2]])?);
            }
            return Ok(m);
        }
        let mut s = 0.0;
        for (d, w) in rule.dirs.iter().zip(&rule.weights) {
            s += w * self.at(&[r * d[0], r * d[1], r * d[2]])?.powf(p);
        }
        Ok(s.powf(1.0 / p))
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn weighted_magnitudes(f: &RadialFunction, p: f64, w: &Weighting) -> Result<Vec<f64>> {
    let rule = SphereRule::new(8);
    f.grid
        .nodes()
        .iter()
        .zip(&f.values)
        .map(|(&r, v)| Ok(w.radial_factor(r, p, &rule)? * v.norm()))
        .collect()
}

/// `(∫ |w^a f|^p 4πr² dr)^{1/p}` including the `[0, r_min]` core, or the
/// sample maximum for `p = ∞`. A core whose local power law is not
/// integrable is reported as divergent.
pub fn lp_norm(f: &RadialFunction, p: f64, w: &Weighting) -> Result<f64> {
    check_exponent(p)?;
    let m = weighted_magnitudes(f, p, w)?;
    if p.is_infinite() {
        return Ok(m.iter().cloned().fold(0.0, f64::max));
    }
    let g = &f.grid;
    let body: f64 = (0..g.len()).map(|i| g.volume_weight(i) * m[i].powf(p)).sum();
    let density = |i: usize| {
        let r = g.nodes()[i];
        (r, 4.0 * PI * r * r * m[i].powf(p))
    };
    let core = core_integral(g.r_min(), density(0), density(1))
        .ok_or_else(|| Error::Divergent(format!("L^{p} integrand is not integrable at r = 0")))?;
    Ok((body + core).powf(1.0 / p))
}

/// Discrete `(Σ |w^a f|^p h³)^{1/p}` on a box; `p = ∞` is the sample maximum.
pub fn lp_norm_3d(f: &Field3D, p: f64, w: &Weighting) -> Result<f64> {
    check_exponent(p)?;
    let m: Vec<f64> = (0..f.len())
        .map(|i| Ok(w.at(&f.point(i))? * f.values[i].norm()))
        .collect::<Result<_>>()?;
    if p.is_infinite() {
        return Ok(m.iter().cloned().fold(0.0, f64::max));
    }
    Ok((m.iter().map(|v| v.powf(p)).sum::<f64>() * f.cell_volume()).powf(1.0 / p))
}

/// `sup_λ λ μ{|f| > λ}^{1/q}` from samples with cell measures.
///
/// A sample marks the level at the middle of its cell, so the level set just
/// below it holds the larger cells plus half of its own. Tied samples form a
/// plateau and count in full. `core` is a cell that never joins a plateau.
fn weak_from_samples(mut cells: Vec<(f64, f64)>, core: Option<(f64, f64)>, q: f64) -> f64 {
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut measure = 0.0;
    let mut best = 0.0f64;
    let mut core = core;
    let mut i = 0;
    while i < cells.len() {
        let v = cells[i].0;
        if let Some((cv, cm)) = core.filter(|c| c.0 >= v) {
            best = best.max(cv * (measure + 0.5 * cm).powf(1.0 / q));
            measure += cm;
            core = None;
        }
        let mut j = i;
        let mut group = 0.0;
        while j < cells.len() && cells[j].0 == v {
            group += cells[j].1;
            j += 1;
        }
        let level = if j - i == 1 { measure + 0.5 * group } else { measure + group };
        best = best.max(v * level.powf(1.0 / q));
        measure += group;
        i = j;
    }
    if let Some((cv, cm)) = core {
        best = best.max(cv * (measure + 0.5 * cm).powf(1.0 / q));
    }
    best
}

/// Weak Lorentz `L^{q,∞}` quasi-norm of radial samples. The ball `r < r_min`
/// is one cell carrying the innermost sample value.
pub fn weak_lorentz_norm(f: &RadialFunction, q: f64, w: &Weighting) -> Result<f64> {
    check_exponent(q)?;
    if q.is_infinite() {
        return Err(Error::InvalidExponent(q));
    }
    let m = weighted_magnitudes(f, q, w)?;
    let g = &f.grid;
    let cells: Vec<(f64, f64)> = (0..g.len()).map(|i| (m[i], g.volume_weight(i))).collect();
    let core = (m[0], 4.0 * PI * g.r_min().powi(3) / 3.0);
    Ok(weak_from_samples(cells, Some(core), q))
}

pub fn weak_lorentz_norm_3d(f: &Field3D, q: f64, w: &Weighting) -> Result<f64> {
    check_exponent(q)?;
    if q.is_infinite() {
        return Err(Error::InvalidExponent(q));
    }
    let h3 = f.cell_volume();
    let cells = (0..f.len())
        .map(|i| Ok((w.at(&f.point(i))? * f.values[i].norm(), h3)))
        .collect::<Result<Vec<_>>>()?;
    Ok(weak_from_samples(cells, None, q))
}

/// Norm of a radial function in either flavor.
pub fn norm(f: &RadialFunction, exponent: f64, w: &Weighting, flavor: Flavor) -> Result<f64> {
    match flavor {
        Flavor::Strong => lp_norm(f, exponent, w),
        Flavor::WeakLorentz => weak_lorentz_norm(f, exponent, w),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementReport {
    /// Norm on each refinement level; `None` where the core is not integrable.
    pub values: Vec<Option<f64>>,
    pub divergent: bool,
    /// Last two relative changes fell below 1% and 0.25%.
    pub converged: bool,
}

/// Next refinement level: ten times smaller `r_min`, half the panel widths.
pub fn refine_grid(g: &RadialGrid) -> RadialGrid {
    let r_min = g.r_min() / 10.0;
    let mut breaks = vec![r_min];
    let mut r = r_min;
    while r * 2.0 < g.r_min() {
        r *= 2.0;
        breaks.push(r);
    }
    breaks.extend_from_slice(g.breaks());
    RadialGrid::from_breaks(breaks).refined()
}

/// Evaluate the norm of an analytic profile on `levels` successively refined
/// grids. Divergence is declared when the core is not integrable or when two
/// successive refinements each grow the norm by more than 25%.
pub fn refinement_study(
    f: &dyn Fn(f64) -> C64,
    base: &RadialGrid,
    exponent: f64,
    w: &Weighting,
    flavor: Flavor,
    levels: usize,
) -> Result<RefinementReport> {
    let mut grid = base.clone();
    let mut values = Vec::with_capacity(levels);
    for _ in 0..levels {
        let sample = RadialFunction::from_fn(&grid, f);
        values.push(match norm(&sample, exponent, w, flavor) {
            Ok(v) => Some(v),
            Err(Error::Divergent(_)) => None,
            Err(e) => return Err(e),
        });
        grid = refine_grid(&grid);
    }
    let finite: Vec<f64> = values.iter().flatten().cloned().collect();
    let growth: Vec<f64> = finite.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    let runaway = growth.windows(2).any(|g| g[0] > 0.25 && g[1] > 0.25);
    let divergent = values.iter().any(|v| v.is_none()) || runaway;
    let converged = !divergent
        && growth.len() >= 2
        && growth[growth.len() - 2].abs() < 0.01
        && growth[growth.len() - 1].abs() < 0.0025;
    Ok(RefinementReport {
        values,
        divergent,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::green_tilde;
    use proptest::prelude::*;

    fn grid() -> RadialGrid {
        RadialGrid::geometric_uniform(1e-3, 40.0, 0.125)
    }

    fn g_i(r: f64) -> C64 {
        green_tilde(C64::new(0.0, 1.0), r)
    }

    #[test]
    fn shell_indicator_volume() {
        let g = RadialGrid::geometric_uniform(1e-3, 4.0, 0.25);
        let f = RadialFunction::from_real_fn(&g, |r| if (1.0..=2.0).contains(&r) { 1.0 } else { 0.0 });
        let v = lp_norm(&f, 1.0, &Weighting::unit()).unwrap();
        assert!((v - 4.0 * PI * 7.0 / 3.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn green_kernel_norms() {
        let f = RadialFunction::from_fn(&grid(), g_i);
        let two = lp_norm(&f, 2.0, &Weighting::unit()).unwrap();
        assert!((two - 1.0 / (8.0 * PI).sqrt()).abs() < 1e-6, "{two}");
        assert!(matches!(lp_norm(&f, 3.0, &Weighting::unit()), Err(Error::Divergent(_))));
        let study = refinement_study(&g_i, &grid(), 3.0, &Weighting::unit(), Flavor::Strong, 3).unwrap();
        assert!(study.divergent);
        let study = refinement_study(&g_i, &grid(), 2.5, &Weighting::unit(), Flavor::Strong, 3).unwrap();
        assert!(!study.divergent && study.converged, "{study:?}");
    }

    #[test]
    fn weak_norm_of_coulomb_profile_is_finite() {
        let g0 = |r: f64| C64::new(1.0 / (4.0 * PI * r), 0.0);
        let big = RadialGrid::geometric_uniform(1e-3, 100.0, 0.5);
        let weak = refinement_study(&g0, &big, 3.0, &Weighting::unit(), Flavor::WeakLorentz, 3).unwrap();
        assert!(!weak.divergent);
        let exact = (4.0 * PI / 3.0f64).powf(1.0 / 3.0) / (4.0 * PI);
        for v in weak.values.iter().flatten() {
            assert!((v - exact).abs() < 1e-2 * exact, "{v} vs {exact}");
        }
        let strong = refinement_study(&g0, &big, 3.0, &Weighting::unit(), Flavor::Strong, 3).unwrap();
        assert!(strong.divergent);
    }

    #[test]
    fn weak_norm_of_unit_ball() {
        let g = RadialGrid::from_breaks(vec![1e-3, 0.5, 1.0, 2.0]);
        let f = RadialFunction::from_real_fn(&g, |r| if r <= 1.0 { 1.0 } else { 0.0 });
        for &q in &[1.0, 2.0, 3.5] {
            let v = weak_lorentz_norm(&f, q, &Weighting::unit()).unwrap();
            assert!((v - (4.0 * PI / 3.0f64).powf(1.0 / q)).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_norm_uses_sphere_average_off_center() {
        let g = RadialGrid::geometric_uniform(1e-3, 6.0, 0.25);
        let f = RadialFunction::from_real_fn(&g, |r| (-r * r).exp());
        let centered = Weighting::new(WeightSpec::ConjQ { q: 6.0, center: [0.0; 3] }, 1.0);
        let shifted = Weighting::new(WeightSpec::ConjQ { q: 6.0, center: [0.0, 0.0, 1e-9] }, 1.0);
        let a = lp_norm(&f, 2.0, &centered).unwrap();
        let b = lp_norm(&f, 2.0, &shifted).unwrap();
        assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn box_norms() {
        let f = Field3D::cube(1.0, 3, |_| C64::new(2.0, 0.0));
        assert!((lp_norm_3d(&f, 1.0, &Weighting::unit()).unwrap() - 2.0 * 27.0).abs() < 1e-12);
        assert_eq!(lp_norm_3d(&f, f64::INFINITY, &Weighting::unit()).unwrap(), 2.0);
        assert!((weak_lorentz_norm_3d(&f, 3.0, &Weighting::unit()).unwrap() - 2.0 * 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn holder_and_weak_embedding(a in 0.2f64..3.0, b in -1.0f64..1.0, c in 0.1f64..2.0) {
            let g = RadialGrid::geometric_uniform(1e-3, 12.0, 0.25);
            let f = RadialFunction::from_real_fn(&g, |r| (-(a * r * r)).exp() * (1.0 + b * (c * r).sin()));
            let u = Weighting::unit();
            let two = lp_norm(&f, 2.0, &u).unwrap();
            let inf = lp_norm(&f, f64::INFINITY, &u).unwrap();
            for &q in &[2.5, 4.0] {
                let lq = lp_norm(&f, q, &u).unwrap();
                prop_assert!(lq <= two.powf(2.0 / q) * inf.powf(1.0 - 2.0 / q) * (1.0 + 1e-9));
                prop_assert!(weak_lorentz_norm(&f, q, &u).unwrap() <= lq * (1.0 + 1e-9));
            }
        }

        #[test]
        fn weak_norm_is_homogeneous(scale in -5.0f64..5.0, q in 1.0f64..6.0) {
            let g = RadialGrid::geometric_uniform(1e-3, 8.0, 0.25);
            let f = RadialFunction::from_real_fn(&g, |r| (-r).exp() / r);
            let c = C64::new(scale, 0.7);
            let lhs = weak_lorentz_norm(&f.scale(c), q, &Weighting::unit()).unwrap();
            let rhs = c.norm() * weak_lorentz_norm(&f, q, &Weighting::unit()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }
}
