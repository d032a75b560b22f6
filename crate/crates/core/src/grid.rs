//! Radial grids, sampled radial functions and Cartesian sampling boxes.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::{GridParams, Point3};
use crate::quadrature::{self, PANEL_ORDER};
use crate::C64;

/// Composite Gauss–Legendre grid on `[r_min, r_max]`, `r_min > 0`.
///
/// Stores line weights for `∫ · dr`; [`RadialGrid::volume_weight`] gives the
/// weights for `∫ · 4πr² dr`. Panels are kept so samples can be interpolated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    breaks: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Grid with the given panel breakpoints (strictly increasing, first > 0).
    pub fn from_breaks(breaks: Vec<f64>) -> Self {
        assert!(breaks.len() >= 2, "need at least one panel");
        assert!(breaks[0] > 0.0, "radial grid must start at r > 0");
        assert!(breaks.windows(2).all(|w| w[1] > w[0]), "breaks must increase");
        let (nodes, weights) = quadrature::composite(&breaks);
        RadialGrid {
            breaks,
            nodes,
            weights,
        }
    }

    /// Geometric panels (ratio 2) from `r_min` until a panel would be wider
    /// than `panel_width`, then uniform panels no wider than `panel_width`.
    pub fn geometric_uniform(r_min: f64, r_max: f64, panel_width: f64) -> Self {
        assert!(r_min > 0.0 && r_max > r_min && panel_width > 0.0);
        let r_switch = panel_width.clamp(r_min, r_max);
        let mut breaks = vec![r_min];
        let mut r = r_min;
        while r * 2.0 < r_switch {
            r *= 2.0;
            breaks.push(r);
        }
        if r_switch > r {
            breaks.push(r_switch);
        }
        if r_max > r_switch {
            for b in quadrature::uniform_breaks(r_switch, r_max, panel_width).into_iter().skip(1) {
                breaks.push(b);
            }
        }
        Self::from_breaks(breaks)
    }

    pub fn from_params(p: &GridParams) -> Self {
        Self::geometric_uniform(p.r_min, p.r_max, p.panel_width)
    }

    /// Same panels split in half; the refinement used by convergence studies.
    pub fn refined(&self) -> Self {
        let mut breaks = Vec::with_capacity(2 * self.breaks.len());
        for w in self.breaks.windows(2) {
            breaks.push(w[0]);
            breaks.push(0.5 * (w[0] + w[1]));
        }
        breaks.push(*self.breaks.last().unwrap());
        Self::from_breaks(breaks)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.breaks[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn volume_weight(&self, i: usize) -> f64 {
        4.0 * PI * self.nodes[i] * self.nodes[i] * self.weights[i]
    }

    /// `∫ g(r) 4πr² dr` over the grid extent.
    pub fn integrate_volume(&self, g: impl Fn(f64) -> f64) -> f64 {
        (0..self.len()).map(|i| self.volume_weight(i) * g(self.nodes[i])).sum()
    }

    /// Largest node spacing inside any panel (average spacing per panel).
    pub fn max_spacing(&self) -> f64 {
        self.breaks
            .windows(2)
            .map(|w| (w[1] - w[0]) / PANEL_ORDER as f64)
            .fold(0.0, f64::max)
    }

    fn panel_of(&self, r: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b <= r);
        k.saturating_sub(1).min(self.breaks.len() - 2)
    }
}

/// `∫_0^{r_min} g dr` for a line density `g` known at the first two nodes,
/// assuming a power law `g ∝ r^e` below the grid. Exact for pure powers, which
/// covers the `1/r` singular basis and smooth (constant) profiles.
/// Returns `None` when `e ≤ −1`, i.e. the density is not integrable at 0.
pub fn core_integral(r_min: f64, (r0, g0): (f64, f64), (r1, g1): (f64, f64)) -> Option<f64> {
    if g0 == 0.0 || g1 == 0.0 {
        return Some(0.0);
    }
    let e = (g1 / g0).ln() / (r1 / r0).ln();
    if e <= -1.0 + 1e-2 {
        return None;
    }
    let g_min = g0 * (r_min / r0).powf(e);
    Some(g_min * r_min / (e + 1.0))
}

/// Lagrange interpolation through the nodes of one panel.
fn lagrange(xs: &[f64], ys: &[C64], x: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        if x == xi {
            return yi;
        }
        let mut l = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                l *= (x - xj) / (xi - xj);
            }
        }
        acc += yi * l;
    }
    acc
}

/// Samples `f̃(r_m)` of a radial function `f(x) = f̃(|x|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialFunction {
    pub grid: RadialGrid,
    pub values: Vec<C64>,
}

impl RadialFunction {
    pub fn new(grid: RadialGrid, values: Vec<C64>) -> Self {
        assert_eq!(grid.len(), values.len());
        assert!(values.iter().all(|v| v.re.is_finite() && v.im.is_finite()), "non-finite sample");
        RadialFunction { grid, values }
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn from_real_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| C64::new(f(r), 0.0))
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self::new(grid.clone(), vec![C64::new(0.0, 0.0); grid.len()])
    }

    /// `‖f‖₂` with the `4πr² dr` measure, including the `[0, r_min]` core.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// `⟨g, f⟩ = ∫ conj(g) f`, including the `[0, r_min]` core.
    pub fn inner(&self, other: &RadialFunction) -> C64 {
        assert_eq!(self.grid, other.grid, "inner product needs a shared grid");
        let body: C64 = (0..self.grid.len())
            .map(|i| other.values[i].conj() * self.values[i] * self.grid.volume_weight(i))
            .sum();
        let (x, w) = quadrature::gl8();
        let h = 0.5 * self.grid.r_min();
        let core: C64 = x
            .iter()
            .zip(w)
            .map(|(xi, wi)| {
                let r = h * (1.0 + xi);
                other.reduced(r).conj() * self.reduced(r) * (4.0 * PI * h * wi)
            })
            .sum();
        body + core
    }

    /// `u(r) = r f̃(r)`, the half-line profile. Below `r_min` the first panel's
    /// interpolant of `u` is extended to 0; `u` stays bounded for the `1/r`
    /// singular basis, so the extension is accurate for both smooth and
    /// singular data.
    pub fn reduced(&self, r: f64) -> C64 {
        if r >= self.grid.r_min() {
            return self.eval(r) * r;
        }
        let xs = &self.grid.nodes[..PANEL_ORDER];
        let us: Vec<C64> = xs.iter().zip(&self.values).map(|(x, v)| v * x).collect();
        lagrange(xs, &us, r)
    }

    /// Value at an arbitrary radius by in-panel interpolation; zero beyond `r_max`.
    pub fn eval(&self, r: f64) -> C64 {
        if r > self.grid.r_max() {
            return C64::new(0.0, 0.0);
        }
        let k = self.grid.panel_of(r);
        let s = k * PANEL_ORDER;
        lagrange(&self.grid.nodes[s..s + PANEL_ORDER], &self.values[s..s + PANEL_ORDER], r)
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|_, v| v * c)
    }

    pub fn add(&self, other: &RadialFunction) -> Self {
        assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn sub(&self, other: &RadialFunction) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Largest radius whose sample exceeds `rel · max|f|`.
    pub fn support_radius(&self, rel: f64) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut r = self.grid.r_min();
        for (&ri, v) in self.grid.nodes().iter().zip(&self.values) {
            if v.norm() > rel * peak {
                r = ri;
            }
        }
        r
    }
}

/// Anything that can be evaluated at a point of ℝ³.
pub trait ScalarField: Send + Sync {
    fn eval(&self, x: &Point3) -> C64;
}

impl<F: Fn(&Point3) -> C64 + Send + Sync> ScalarField for F {
    fn eval(&self, x: &Point3) -> C64 {
        self(x)
    }
}

impl ScalarField for Field3D {
    fn eval(&self, x: &Point3) -> C64 {
        self.interpolate(x)
    }
}

/// Uniform Cartesian sampling box: nodes at `min + (i, j, k)·h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field3D {
    pub min: Point3,
    pub h: f64,
    pub n: [usize; 3],
    pub values: Vec<C64>,
}

impl Field3D {
    /// Cube `[-half, half]³` with `n` nodes per axis.
    pub fn cube(half: f64, n: usize, f: impl Fn(&Point3) -> C64) -> Self {
        assert!(n >= 2 && half > 0.0);
        let h = 2.0 * half / (n - 1) as f64;
        let mut field = Field3D {
            min: [-half; 3],
            h,
            n: [n; 3],
            values: Vec::new(),
        };
        field.values = (0..n * n * n).map(|idx| f(&field.point(idx))).collect();
        field
    }

    pub fn like(&self, f: impl Fn(&Point3) -> C64) -> Self {
        let values = (0..self.len()).map(|i| f(&self.point(i))).collect();
        Field3D {
            values,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn point(&self, idx: usize) -> Point3 {
        let k = idx % self.n[2];
        let j = (idx / self.n[2]) % self.n[1];
        let i = idx / (self.n[1] * self.n[2]);
        [
            self.min[0] + i as f64 * self.h,
            self.min[1] + j as f64 * self.h,
            self.min[2] + k as f64 * self.h,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(3)
    }

    pub fn contains(&self, x: &Point3) -> bool {
        (0..3).all(|a| x[a] >= self.min[a] && x[a] <= self.min[a] + (self.n[a] - 1) as f64 * self.h)
    }

    /// Discrete `(Σ |f|^p h³)^{1/p}`; `p = ∞` gives the max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.cell_volume()).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn zip_with(&self, other: &Field3D, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!((self.min, self.h, self.n), (other.min, other.h, other.n));
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Field3D {
            values,
            ..self.clone()
        }
    }

    /// Tricubic (4-point Lagrange per axis) interpolation; zero outside the box.
    pub fn interpolate(&self, x: &Point3) -> C64 {
        if !self.contains(x) {
            return C64::new(0.0, 0.0);
        }
        let mut base = [0usize; 3];
        let mut coef = [[0.0; 4]; 3];
        for a in 0..3 {
            let s = (x[a] - self.min[a]) / self.h;
            let n = self.n[a];
            let lo = (s.floor() as isize - 1).clamp(0, n.saturating_sub(4) as isize) as usize;
            base[a] = lo;
            let m = n.min(4);
            for (p, c) in coef[a].iter_mut().enumerate().take(m) {
                let mut l = 1.0;
                for q in 0..m {
                    if q != p {
                        l *= (s - (lo + q) as f64) / (p as f64 - q as f64);
                    }
                }
                *c = l;
            }
        }
        let m = [self.n[0].min(4), self.n[1].min(4), self.n[2].min(4)];
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..m[0] {
            for q in 0..m[1] {
                for r in 0..m[2] {
                    let idx = self.index(base[0] + p, base[1] + q, base[2] + r);
                    acc += self.values[idx] * (coef[0][p] * coef[1][q] * coef[2][r]);
                }
            }
        }
        acc
    }
}
