//! Gauss–Legendre rules and composite panel quadrature.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Points per panel for all composite rules in the crate.
pub const PANEL_ORDER: usize = 8;

/// Cached 8-point rule.
pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Append the mapped 8-point rule for `[a, b]` to `nodes`/`weights`.
pub fn push_panel(a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let (x, w) = gl8();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (xi, wi) in x.iter().zip(w) {
        nodes.push(mid + half * xi);
        weights.push(half * wi);
    }
}

/// Composite rule over consecutive breakpoints.
pub fn composite(breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(breaks.len() * PANEL_ORDER);
    let mut weights = Vec::with_capacity(breaks.len() * PANEL_ORDER);
    for pair in breaks.windows(2) {
        if pair[1] > pair[0] {
            push_panel(pair[0], pair[1], &mut nodes, &mut weights);
        }
    }
    (nodes, weights)
}

/// Breakpoints splitting `[a, b]` into equal panels no wider than `h`.
pub fn uniform_breaks(a: f64, b: f64, h: f64) -> Vec<f64> {
    let n = (((b - a) / h).ceil() as usize).max(1);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Integrate `f` over `[a, b]` with panels no wider than `h`.
pub fn integrate<T, F>(a: f64, b: f64, h: f64, f: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: Fn(f64) -> T,
{
    let (nodes, weights) = composite(&uniform_breaks(a, b, h));
    nodes
        .iter()
        .zip(&weights)
        .fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        for deg in 0..16 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "degree {deg}: {s} vs {exact}");
        }
    }

    #[test]
    fn odd_order_rule_has_center_node() {
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_gaussian() {
        let v: f64 = integrate(-8.0, 8.0, 0.5, |x| (-x * x).exp());
        assert!((v - PI.sqrt()).abs() < 1e-13);
    }
}
