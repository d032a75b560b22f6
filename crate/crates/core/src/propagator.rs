//! Time evolution `u(t) = e^{-itH_α} f` for a single center.
//!
//! Radial data is handled on the half line through `u = r f̃`. The free flow is
//! the odd extension of the 1D kernel `K(x) = (4πit)^{-1/2} e^{ix²/4t}`; the
//! point interaction enters through boundary corrections that are all of the
//! form `(C/r) ∫ K(r + b) g(b) db` with a time-independent profile `g`:
//!
//! * `α = 0`: `g = u` on `[0, R]`, `C = 2` (even extension);
//! * `α > 0`: `g(b) = ∫ e^{-κ(b-ρ)} u(ρ) dρ` over `0 ≤ b − ρ ≤ s_cut`, `C = −2κ`;
//! * `α < 0`: `g(b) = ∫ e^{κ(ρ-b)} u(ρ) dρ` over `0 ≤ ρ − b ≤ s_cut`, `C = 2κ`,
//!   plus the bound state `ψ_α ⟨ψ_α, f⟩ e^{itκ²}`;
//!
//! where `κ = 4πα`. The `α ≠ 0` corrections are added on top of the `α = 0` one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{distance, norm3, InteractionConfig, Point3, Strength};
use crate::error::{Error, Result};
use crate::gamma::bound_state_value;
use crate::grid::{Field3D, RadialFunction, RadialGrid, ScalarField};
use crate::quadrature::{gauss_legendre, push_panel, uniform_breaks, PANEL_ORDER};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// Continuous-spectrum part only.
    Ac,
    Full,
}

impl std::str::FromStr for Projection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ac" => Ok(Projection::Ac),
            "full" => Ok(Projection::Full),
            other => Err(Error::InvalidArgument(format!("projection must be ac or full, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum CaseTag {
    Free,
    Alpha0,
    AlphaPos,
    AlphaNeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatorOptions {
    /// Largest momentum carried by the output grid.
    pub k_max: f64,
    /// Quadrature points per period of the fastest kernel phase.
    pub oversampling: f64,
    /// Mean quadrature spacing requested by the caller; must satisfy the
    /// oscillation rule.
    pub rho_step: Option<f64>,
    pub r_out_min: f64,
    pub max_panel: f64,
    /// Largest admissible bound on the dropped `s`-tail.
    pub tail_tol: f64,
    /// Relative L² change below which R-escalation stops.
    pub escalation_tol: f64,
    pub max_doublings: usize,
    /// Cap on (output nodes) × (quadrature nodes) per evaluation.
    pub max_work: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            k_max: 32.0,
            oversampling: 10.0,
            rho_step: None,
            r_out_min: 1e-3,
            max_panel: 0.25,
            tail_tol: 1e-10,
            escalation_tol: 1e-6,
            max_doublings: 6,
            max_work: 4e9,
        }
    }
}

/// `(4πit)^{-1/2}` on the principal branch.
pub fn kernel_prefactor(t: f64) -> C64 {
    C64::new(0.0, 4.0 * PI * t).powf(-0.5)
}

/// `ln(10¹²)/(4π|α|)`.
pub fn default_s_cut(alpha: f64) -> f64 {
    (1e12f64).ln() / (4.0 * PI * alpha.abs())
}

/// Bound on `∫_{s_cut}^∞ e^{-4π|α|s} ds`.
pub fn s_tail_bound(alpha: f64, s_cut: f64) -> f64 {
    let k = 4.0 * PI * alpha.abs();
    (-k * s_cut).exp() / k
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be positive, got {t}")))
    }
}

/// Largest mean spacing allowed by the oscillation rule
/// `Δρ ≤ 2πt / (K (r_max + ρ_max + s_cut))`.
pub fn allowed_step(t: f64, r_max: f64, rho_max: f64, s_cut: f64, oversampling: f64) -> f64 {
    2.0 * PI * t / (oversampling * (r_max + rho_max + s_cut))
}

fn panel_width(opts: &PropagatorOptions, allowed: f64) -> Result<f64> {
    let step = match opts.rho_step {
        Some(s) if s > allowed => return Err(Error::OscillationUnresolved { step: s, allowed }),
        Some(s) => s,
        None => allowed,
    };
    Ok(step * PANEL_ORDER as f64)
}

fn check_work(opts: &PropagatorOptions, n_out: usize, n_quad: usize, step: f64) -> Result<()> {
    let work = n_out as f64 * n_quad as f64;
    if work > opts.max_work {
        return Err(Error::OscillationUnresolved {
            step,
            allowed: step * work / opts.max_work,
        });
    }
    Ok(())
}

/// Output grid wide enough to carry momenta up to `k_max` at time `t`.
pub fn evolution_grid(t: f64, extent: f64, s_cut: f64, opts: &PropagatorOptions) -> RadialGrid {
    let reach = extent + s_cut + 2.0 * opts.k_max * t + 1.0;
    let k_eff = (reach + extent + s_cut) / (2.0 * t);
    let h = opts.max_panel.min(2.0 * PI / k_eff);
    RadialGrid::geometric_uniform(opts.r_out_min, reach, h)
}

/// Largest radius where `|r f̃(r)|` exceeds `rel` times its maximum.
pub fn reduced_extent(f: &RadialFunction, rel: f64) -> f64 {
    let u: Vec<f64> = f.grid.nodes().iter().zip(&f.values).map(|(r, v)| r * v.norm()).collect();
    let peak = u.iter().cloned().fold(0.0, f64::max);
    let mut ext = f.grid.r_min();
    for (r, ui) in f.grid.nodes().iter().zip(&u) {
        if *ui > rel * peak {
            ext = *r;
        }
    }
    // Snap to the enclosing panel edge so the interpolant is integrated whole.
    let b = f.grid.breaks();
    b[b.partition_point(|&x| x < ext).min(b.len() - 1)]
}

/// Composite GL8 nodes over `[a1, a2]` with breaks at `extra` and at the
/// input grid's own breaks, panels no wider than `h`.
fn quad_nodes(a1: f64, a2: f64, h: f64, extra: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cuts: Vec<f64> = extra.iter().cloned().filter(|&x| x > a1 && x < a2).collect();
    cuts.push(a1);
    cuts.push(a2);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    for w in cuts.windows(2) {
        for p in uniform_breaks(w[0], w[1], h).windows(2) {
            push_panel(p[0], p[1], &mut nodes, &mut weights);
        }
    }
    (nodes, weights)
}

fn source_breaks(f: &RadialFunction) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend_from_slice(f.grid.breaks());
    b
}

/// `(1/r) ∫_0^ρmax [K(r−ρ) − K(r+ρ)] u(ρ) dρ` at each radius.
fn free_at(f: &RadialFunction, t: f64, rs: &[f64], extent: f64, opts: &PropagatorOptions) -> Result<Vec<C64>> {
    let r_max = rs.iter().cloned().fold(0.0, f64::max);
    let allowed = allowed_step(t, r_max, extent, 0.0, opts.oversampling);
    let h = panel_width(opts, allowed)?;
    let (nodes, weights) = quad_nodes(0.0, extent, h, &source_breaks(f));
    check_work(opts, rs.len(), nodes.len(), h / PANEL_ORDER as f64)?;
    let a: Vec<C64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&rho, &w)| f.reduced(rho) * w * C64::cis(rho * rho / (4.0 * t)))
        .collect();
    let pre = kernel_prefactor(t) * C64::new(0.0, -2.0);
    Ok(rs
        .iter()
        .map(|&r| {
            let s: C64 = nodes
                .iter()
                .zip(&a)
                .map(|(&rho, &ai)| ai * (r * rho / (2.0 * t)).sin())
                .sum();
            pre * C64::cis(r * r / (4.0 * t)) * s / r
        })
        .collect())
}

/// `(c/r) Σ_j G_j K(r + b_j)` at each radius; `gw` already carries weights.
fn chirp_at(t: f64, rs: &[f64], bs: &[f64], gw: &[C64], c: f64) -> Vec<C64> {
    let g: Vec<C64> = bs.iter().zip(gw).map(|(&b, &g)| g * C64::cis(b * b / (4.0 * t))).collect();
    if g.iter().all(|v| *v == ZERO) {
        return vec![ZERO; rs.len()];
    }
    let pre = kernel_prefactor(t) * c;
    rs.iter()
        .map(|&r| {
            let s: C64 = bs
                .iter()
                .zip(&g)
                .map(|(&b, &gj)| gj * C64::cis(r * b / (2.0 * t)))
                .sum();
            pre * C64::cis(r * r / (4.0 * t)) * s / r
        })
        .collect()
}

/// `α = 0` piece from `ρ ∈ [a1, a2]`.
fn neumann_piece(f: &RadialFunction, t: f64, rs: &[f64], a1: f64, a2: f64, opts: &PropagatorOptions) -> Result<(Vec<C64>, usize)> {
    let r_max = rs.iter().cloned().fold(0.0, f64::max);
    let h = panel_width(opts, allowed_step(t, r_max, a2, 0.0, opts.oversampling))?;
    let (nodes, weights) = quad_nodes(a1, a2, h, &source_breaks(f));
    check_work(opts, rs.len(), nodes.len(), h / PANEL_ORDER as f64)?;
    let gw: Vec<C64> = nodes.iter().zip(&weights).map(|(&b, &w)| f.reduced(b) * w).collect();
    Ok((chirp_at(t, rs, &nodes, &gw, 2.0), nodes.len()))
}

/// `α ≠ 0` piece from `ρ ∈ [a1, a2]`, excluding the bound state.
fn robin_piece(
    f: &RadialFunction,
    t: f64,
    rs: &[f64],
    (a1, a2): (f64, f64),
    kappa: f64,
    s_cut: f64,
    opts: &PropagatorOptions,
) -> Result<(Vec<C64>, usize)> {
    let r_max = rs.iter().cloned().fold(0.0, f64::max);
    let h = panel_width(opts, allowed_step(t, r_max, a2, s_cut, opts.oversampling))?;
    let k = kappa.abs();
    // b ranges over ρ ± s with s ∈ [0, s_cut].
    let (lo, hi, cuts) = if kappa > 0.0 {
        (a1, a2 + s_cut, [a1, a2, a1 + s_cut, a2 + s_cut])
    } else {
        (a1 - s_cut, a2, [a1 - s_cut, a2 - s_cut, a1, a2])
    };
    let (nodes, weights) = quad_nodes(lo, hi, h, &cuts);
    check_work(opts, rs.len(), nodes.len(), h / PANEL_ORDER as f64)?;
    let inner_h = (0.125f64).min(2.0 / k);
    let breaks = source_breaks(f);
    let gw: Vec<C64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&b, &w)| {
            let (from, to) = if kappa > 0.0 {
                (a1.max(b - s_cut), a2.min(b))
            } else {
                (a1.max(b), a2.min(b + s_cut))
            };
            if to <= from {
                return ZERO;
            }
            let (x, wx) = quad_nodes(from, to, inner_h, &breaks);
            let g: C64 = x
                .iter()
                .zip(&wx)
                .map(|(&rho, &wr)| f.reduced(rho) * ((-k * (b - rho).abs()).exp() * wr))
                .sum();
            g * w
        })
        .collect();
    Ok((chirp_at(t, rs, &nodes, &gw, -2.0 * k), nodes.len()))
}

/// `4π ∫_0^R ψ_α(ρ) f̃(ρ) ρ² dρ` for the normalized bound state.
fn bound_overlap(f: &RadialFunction, alpha: f64, r: f64) -> C64 {
    let kappa = 4.0 * PI * alpha;
    let c = (-2.0 * alpha).sqrt();
    let h = (0.125f64).min(2.0 / kappa.abs());
    let (x, w) = quad_nodes(0.0, r, h, &source_breaks(f));
    x.iter()
        .zip(&w)
        .map(|(&rho, &wr)| f.reduced(rho) * (4.0 * PI * c * (kappa * rho).exp() * wr))
        .sum()
}

/// `P_ac f = f − ψ_α ⟨ψ_α, f⟩` for `α < 0`; the identity otherwise.
pub fn project_ac(cfg: &InteractionConfig, f: &RadialFunction) -> Result<RadialFunction> {
    match cfg.single_strength()? {
        Strength::Finite(alpha) if alpha < 0.0 => {
            let psi = RadialFunction::from_real_fn(&f.grid, |r| bound_state_value(alpha, r));
            let overlap = f.inner(&psi);
            Ok(f.sub(&psi.scale(overlap)))
        }
        _ => Ok(f.clone()),
    }
}

/// `e^{-itΔ} f` on an output grid sized for `t`.
pub fn free_propagator_radial(f: &RadialFunction, t: f64, opts: &PropagatorOptions) -> Result<RadialFunction> {
    check_t(t)?;
    let extent = reduced_extent(f, 1e-16);
    let grid = evolution_grid(t, extent, 0.0, opts);
    let values = free_at(f, t, grid.nodes(), extent, opts)?;
    Ok(RadialFunction::new(grid, values))
}

/// `e^{-itΔ} f` at arbitrary radii.
pub fn free_propagator_radial_at(f: &RadialFunction, t: f64, rs: &[f64], opts: &PropagatorOptions) -> Result<Vec<C64>> {
    check_t(t)?;
    free_at(f, t, rs, reduced_extent(f, 1e-16), opts)
}

/// `M_R f`, the `α = 0` boundary correction with the data truncated to `B_R`.
pub fn mr_correction(f: &RadialFunction, t: f64, r: f64, opts: &PropagatorOptions) -> Result<RadialFunction> {
    check_t(t)?;
    let grid = evolution_grid(t, r.min(reduced_extent(f, 1e-16)), 0.0, opts);
    let (values, _) = neumann_piece(f, t, grid.nodes(), 0.0, r, opts)?;
    Ok(RadialFunction::new(grid, values))
}

fn check_tail(alpha: f64, s_cut: f64, opts: &PropagatorOptions) -> Result<f64> {
    let bound = s_tail_bound(alpha, s_cut);
    if bound > opts.tail_tol {
        return Err(Error::TailTooLarge(bound));
    }
    Ok(bound)
}

/// `M_{α,R} f` for `α > 0`.
pub fn m_alpha_pos_correction(
    f: &RadialFunction,
    t: f64,
    r: f64,
    s_cut: f64,
    alpha: f64,
    opts: &PropagatorOptions,
) -> Result<RadialFunction> {
    check_t(t)?;
    if alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("α must be positive, got {alpha}")));
    }
    check_tail(alpha, s_cut, opts)?;
    let grid = evolution_grid(t, r.min(reduced_extent(f, 1e-16)), s_cut, opts);
    let (values, _) = robin_piece(f, t, grid.nodes(), (0.0, r), 4.0 * PI * alpha, s_cut, opts)?;
    Ok(RadialFunction::new(grid, values))
}

/// `M̃_{α,R} f` for `α < 0`: continuous part plus, for `FULL`, the bound state.
/// With `AC` the input is projected first and the bound-state term is omitted.
pub fn m_alpha_neg_correction(
    f: &RadialFunction,
    t: f64,
    r: f64,
    s_cut: f64,
    alpha: f64,
    projection: Projection,
    opts: &PropagatorOptions,
) -> Result<RadialFunction> {
    check_t(t)?;
    if alpha >= 0.0 {
        return Err(Error::InvalidArgument(format!("α must be negative, got {alpha}")));
    }
    check_tail(alpha, s_cut, opts)?;
    let f = match projection {
        Projection::Ac => project_ac(&InteractionConfig::single(alpha), f)?,
        Projection::Full => f.clone(),
    };
    let grid = evolution_grid(t, r.min(reduced_extent(&f, 1e-16)), s_cut, opts);
    let (mut values, _) = robin_piece(&f, t, grid.nodes(), (0.0, r), 4.0 * PI * alpha, s_cut, opts)?;
    if projection == Projection::Full {
        add_bound_term(&mut values, grid.nodes(), alpha, t, bound_overlap(&f, alpha, r));
    }
    Ok(RadialFunction::new(grid, values))
}

fn add_bound_term(values: &mut [C64], rs: &[f64], alpha: f64, t: f64, overlap: C64) {
    let kappa = 4.0 * PI * alpha;
    let phase = C64::cis(t * kappa * kappa);
    for (v, &r) in values.iter_mut().zip(rs) {
        *v += overlap * phase * bound_state_value(alpha, r);
    }
}

/// How the truncation radius of `B_R` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RPolicy {
    /// Double from the data's support radius until the L² change is small.
    Escalate,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct EvolutionRequest {
    pub cfg: InteractionConfig,
    pub initial: RadialFunction,
    pub t: f64,
    pub r_policy: RPolicy,
    /// Defaults to `ln(10¹²)/(4π|α|)`.
    pub s_cut: Option<f64>,
    pub projection: Projection,
    pub options: PropagatorOptions,
}

impl EvolutionRequest {
    pub fn new(cfg: InteractionConfig, initial: RadialFunction, t: f64) -> Self {
        EvolutionRequest {
            cfg,
            initial,
            t,
            r_policy: RPolicy::Escalate,
            s_cut: None,
            projection: Projection::Full,
            options: PropagatorOptions::default(),
        }
    }

    pub fn projection(mut self, p: Projection) -> Self {
        self.projection = p;
        self
    }

    pub fn r_policy(mut self, p: RPolicy) -> Self {
        self.r_policy = p;
        self
    }

    pub fn options(mut self, o: PropagatorOptions) -> Self {
        self.options = o;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionMeta {
    pub t: f64,
    pub r_used: Option<f64>,
    pub doublings: usize,
    /// `(R, ‖change‖₂)` after each escalation step.
    pub r_history: Vec<(f64, f64)>,
    pub s_cut: Option<f64>,
    pub tail_bound: Option<f64>,
    pub quadrature_nodes: usize,
    pub output_nodes: usize,
    pub correction_norm: f64,
    /// `⟨ψ_α, f⟩` restricted to `B_R`, for `α < 0` with full projection.
    pub bound_overlap: Option<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionResult {
    pub output: RadialFunction,
    pub case: CaseTag,
    pub meta: EvolutionMeta,
}

fn case_of(cfg: &InteractionConfig) -> Result<(CaseTag, f64)> {
    Ok(match cfg.single_strength()? {
        Strength::Infinite => (CaseTag::Free, f64::INFINITY),
        Strength::Finite(0.0) => (CaseTag::Alpha0, 0.0),
        Strength::Finite(a) if a > 0.0 => (CaseTag::AlphaPos, a),
        Strength::Finite(a) => (CaseTag::AlphaNeg, a),
    })
}

/// Boundary corrections from `ρ ∈ [a1, a2]` for the given case.
fn correction_piece(
    f: &RadialFunction,
    t: f64,
    rs: &[f64],
    (a1, a2): (f64, f64),
    case: CaseTag,
    alpha: f64,
    s_cut: f64,
    opts: &PropagatorOptions,
) -> Result<(Vec<C64>, usize)> {
    let (mut v, mut n) = neumann_piece(f, t, rs, a1, a2, opts)?;
    if matches!(case, CaseTag::AlphaPos | CaseTag::AlphaNeg) {
        let (w, m) = robin_piece(f, t, rs, (a1, a2), 4.0 * PI * alpha, s_cut, opts)?;
        for (a, b) in v.iter_mut().zip(w) {
            *a += b;
        }
        n += m;
    }
    Ok((v, n))
}

/// Assemble `e^{-itH_α} f` for a single center.
pub fn evolve(req: &EvolutionRequest) -> Result<EvolutionResult> {
    check_t(req.t)?;
    let (case, alpha) = case_of(&req.cfg)?;
    let opts = &req.options;
    let f = match (case, req.projection) {
        (CaseTag::AlphaNeg, Projection::Ac) => project_ac(&req.cfg, &req.initial)?,
        _ => req.initial.clone(),
    };
    let (s_cut, tail_bound) = match case {
        CaseTag::AlphaPos | CaseTag::AlphaNeg => {
            let s = req.s_cut.unwrap_or_else(|| default_s_cut(alpha));
            (s, Some(check_tail(alpha, s, opts)?))
        }
        _ => (0.0, None),
    };
    let extent = reduced_extent(&f, 1e-16);
    let grid = evolution_grid(req.t, extent, s_cut, opts);
    let rs = grid.nodes();
    let mut values = free_at(&f, req.t, rs, extent, opts)?;
    let mut meta = EvolutionMeta {
        t: req.t,
        r_used: None,
        doublings: 0,
        r_history: Vec::new(),
        s_cut: tail_bound.map(|_| s_cut),
        tail_bound,
        quadrature_nodes: 0,
        output_nodes: rs.len(),
        correction_norm: 0.0,
        bound_overlap: None,
    };
    if case == CaseTag::Free {
        return Ok(EvolutionResult {
            output: RadialFunction::new(grid, values),
            case,
            meta,
        });
    }
    let norm_f = f.l2_norm().max(f64::MIN_POSITIVE);
    let l2 = |v: &[C64]| RadialFunction::new(grid.clone(), v.to_vec()).l2_norm();
    let (mut corr, r_used) = match req.r_policy {
        RPolicy::Fixed(r) => {
            let (c, n) = correction_piece(&f, req.t, rs, (0.0, r), case, alpha, s_cut, opts)?;
            meta.quadrature_nodes += n;
            (c, r)
        }
        RPolicy::Escalate => {
            let r0 = reduced_extent(&f, 1e-3).max(2.0 * f.grid.r_min());
            let (mut total, n) = correction_piece(&f, req.t, rs, (0.0, r0), case, alpha, s_cut, opts)?;
            meta.quadrature_nodes += n;
            let mut r = r0;
            let mut converged = false;
            let mut last = f64::INFINITY;
            for d in 1..=opts.max_doublings {
                let (piece, n) = correction_piece(&f, req.t, rs, (r, 2.0 * r), case, alpha, s_cut, opts)?;
                meta.quadrature_nodes += n;
                r *= 2.0;
                last = l2(&piece);
                meta.r_history.push((r, last));
                meta.doublings = d;
                for (a, b) in total.iter_mut().zip(piece) {
                    *a += b;
                }
                if last < opts.escalation_tol * norm_f {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence(last / norm_f));
            }
            (total, r)
        }
    };
    if case == CaseTag::AlphaNeg && req.projection == Projection::Full {
        let overlap = bound_overlap(&f, alpha, r_used);
        add_bound_term(&mut corr, rs, alpha, req.t, overlap);
        meta.bound_overlap = Some(overlap);
    }
    meta.correction_norm = l2(&corr);
    meta.r_used = Some(r_used);
    for (a, b) in values.iter_mut().zip(&corr) {
        *a += b;
    }
    Ok(EvolutionResult {
        output: RadialFunction::new(grid, values),
        case,
        meta,
    })
}

/// `e^{-itH_α} f` at arbitrary radii, with `R` fixed by a grid run first.
pub fn evolve_at(req: &EvolutionRequest, rs: &[f64]) -> Result<Vec<C64>> {
    let (case, alpha) = case_of(&req.cfg)?;
    let f = match (case, req.projection) {
        (CaseTag::AlphaNeg, Projection::Ac) => project_ac(&req.cfg, &req.initial)?,
        _ => req.initial.clone(),
    };
    let extent = reduced_extent(&f, 1e-16);
    let mut values = free_at(&f, req.t, rs, extent, &req.options)?;
    if case == CaseTag::Free {
        return Ok(values);
    }
    let r_used = match req.r_policy {
        RPolicy::Fixed(r) => r,
        RPolicy::Escalate => evolve(req)?.meta.r_used.expect("corrections present"),
    };
    let s_cut = req.s_cut.unwrap_or_else(|| default_s_cut(alpha));
    let (mut corr, _) = correction_piece(&f, req.t, rs, (0.0, r_used), case, alpha, s_cut, &req.options)?;
    if case == CaseTag::AlphaNeg && req.projection == Projection::Full {
        add_bound_term(&mut corr, rs, alpha, req.t, bound_overlap(&f, alpha, r_used));
    }
    for (a, b) in values.iter_mut().zip(corr) {
        *a += b;
    }
    Ok(values)
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ`, uniform in `φ`.
/// Weights sum to one, so `Σ w f(ω)` is a spherical average.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dirs: Vec<Point3>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n_theta: usize) -> Self {
        let (ct, wt) = gauss_legendre(n_theta);
        let n_phi = 2 * n_theta;
        let mut dirs = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (c, w) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                dirs.push([s * phi.cos(), s * phi.sin(), *c]);
                weights.push(0.5 * w / n_phi as f64);
            }
        }
        SphereRule { dirs, weights }
    }

    /// Spherical mean of `f` over the sphere of radius `r` about `center`.
    pub fn mean(&self, f: &dyn ScalarField, center: &Point3, r: f64) -> C64 {
        self.dirs
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| {
                let x = [center[0] + r * d[0], center[1] + r * d[1], center[2] + r * d[2]];
                f.eval(&x) * *w
            })
            .sum()
    }
}

/// Radial grid adapted to a box: geometric near the center, panels of one box
/// spacing out to the farthest corner.
pub fn box_radial_grid(f: &Field3D, center: &Point3) -> RadialGrid {
    let corner = (0..8)
        .map(|m| {
            let x: Point3 = std::array::from_fn(|a| f.min[a] + if m >> a & 1 == 1 { (f.n[a] - 1) as f64 * f.h } else { 0.0 });
            distance(&x, center)
        })
        .fold(0.0, f64::max);
    RadialGrid::geometric_uniform(1e-3f64.min(f.h / 8.0), corner, f.h)
}

/// Spherical average `f₁` about `center` on `grid`.
pub fn radial_part(f: &dyn ScalarField, center: &Point3, grid: &RadialGrid, rule: &SphereRule) -> RadialFunction {
    RadialFunction::from_fn(grid, |r| rule.mean(f, center, r))
}

/// Split `f = f₁ + f₂` into its spherical average about the origin and the rest.
pub fn project_radial(f: &Field3D) -> (RadialFunction, Field3D) {
    project_radial_about(f, &[0.0; 3], &SphereRule::new(16))
}

pub fn project_radial_about(f: &Field3D, center: &Point3, rule: &SphereRule) -> (RadialFunction, Field3D) {
    let grid = box_radial_grid(f, center);
    let f1 = radial_part(f, center, &grid, rule);
    let f2 = f.like(|x| f.interpolate(x) - f1.eval(distance(x, center)));
    // Evaluate f at nodes exactly rather than through the interpolant.
    let f2 = f2.zip_with(f, |_, v| v).zip_with(&f.like(|x| f1.eval(distance(x, center))), |a, b| a - b);
    (f1, f2)
}

/// Brute-force `e^{-itΔ}` on a box: the discrete sum
/// `h³ Σ_y (4πit)^{-3/2} e^{i|x−y|²/4t} f(y)` over the box nodes, evaluated at
/// the same nodes. The kernel factorizes over axes, so the sum is applied one
/// axis at a time; the result is the same sum at lower cost.
pub fn free_propagator_3d_oracle(f: &Field3D, t: f64) -> Result<Field3D> {
    check_t(t)?;
    let mut out = f.clone();
    let k1 = kernel_prefactor(t) * f.h;
    for axis in 0..3 {
        let n = f.n[axis];
        let m: Vec<C64> = (0..n * n)
            .map(|ab| {
                let d = (ab / n) as f64 * f.h - (ab % n) as f64 * f.h;
                k1 * C64::cis(d * d / (4.0 * t))
            })
            .collect();
        let stride = match axis {
            0 => f.n[1] * f.n[2],
            1 => f.n[2],
            _ => 1,
        };
        let src = out.values.clone();
        let mut line = vec![ZERO; n];
        for base in 0..src.len() {
            // Visit each line once, from its first node.
            if (base / stride) % n != 0 {
                continue;
            }
            for (a, slot) in line.iter_mut().enumerate() {
                *slot = (0..n).map(|b| m[a * n + b] * src[base + b * stride]).sum();
            }
            for (a, v) in line.iter().enumerate() {
                out.values[base + a * stride] = *v;
            }
        }
    }
    Ok(out)
}

/// Radial free evolution against the boxed kernel sum for `e^{−r²/σ²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub t: f64,
    pub n: usize,
    pub half_extent: f64,
    pub width2: f64,
    pub relative_l2: f64,
    pub max_abs: f64,
}

/// Relative L² difference over the box nodes between the radial route and
/// [`free_propagator_3d_oracle`].
pub fn oracle_compare(n: usize, half_extent: f64, width2: f64, t: f64, opts: &PropagatorOptions) -> Result<OracleReport> {
    let grid = RadialGrid::geometric_uniform(1e-3, 2.0 * half_extent, 0.05);
    let f = RadialFunction::from_real_fn(&grid, |r| (-r * r / width2).exp());
    let boxed = Field3D::cube(half_extent, n, |x| C64::new((-norm3(x).powi(2) / width2).exp(), 0.0));
    let oracle = free_propagator_3d_oracle(&boxed, t)?;
    let radii: Vec<f64> = (0..boxed.len()).map(|i| norm3(&boxed.point(i))).collect();
    let radial = free_propagator_radial_at(&f, t, &radii, opts)?;
    let num: f64 = oracle.values.iter().zip(&radial).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = oracle.values.iter().map(|a| a.norm_sqr()).sum();
    let max_abs = oracle.values.iter().zip(&radial).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(OracleReport {
        t,
        n,
        half_extent,
        width2,
        relative_l2: (num / den).sqrt(),
        max_abs,
    })
}

/// `e^{-itH_α} f` for non-radial box data: the radial part about the center
/// evolves under `H_α`, the rest under the free flow.
pub fn evolve_general(
    cfg: &InteractionConfig,
    f: &Field3D,
    t: f64,
    projection: Projection,
    opts: &PropagatorOptions,
) -> Result<Field3D> {
    let center = *cfg.centers().first().ok_or(Error::Empty)?;
    case_of(cfg)?;
    let (f1, f2) = project_radial_about(f, &center, &SphereRule::new(16));
    let mut out = free_propagator_3d_oracle(&f2, t)?;
    let rs: Vec<f64> = (0..f.len())
        .map(|i| distance(&f.point(i), &center).max(opts.r_out_min))
        .collect();
    let req = EvolutionRequest {
        projection,
        options: *opts,
        ..EvolutionRequest::new(cfg.clone(), f1, t)
    };
    let radial = evolve_at(&req, &rs)?;
    for (v, u) in out.values.iter_mut().zip(radial) {
        *v += u;
    }
    Ok(out)
}
