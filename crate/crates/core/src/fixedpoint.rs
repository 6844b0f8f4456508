//! Regularized fixed-point construction.
//!
//! For `eps in ]0,1[` the map
//!
//! ```text
//! T(z1, z2) = (solve(p1, a1 f(min(z1,R) + eps, min(z2,R))),
//!              solve(p2, a2 g(min(z1,R), min(z2,R) + eps)))
//! ```
//! sends the box between the lower and upper envelopes into itself. A damped
//! Picard iteration looks for its fixed point, and a decreasing sequence of
//! `eps` values drives the regularization towards zero.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::bounds::BoundsReport;
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::hypotheses::{critical_exponent, ExponentConfig, Side};
use crate::math::powf;
use crate::plap::{self, Boundary, PLapProblem, TestFunctionSet};
use crate::weights::WeightSpec;

/// `f(s, t) = M1 s^{alpha1} (1 + t^{beta1})`, `s > 0`.
pub fn eval_f(cfg: &ExponentConfig, s: f64, t: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::SingularArgument(s));
    }
    Ok(cfg.big_m1 * powf(s, cfg.alpha1) * (1.0 + powf(t.max(0.0), cfg.beta1)))
}

/// `g(s, t) = M2 (1 + s^{alpha2}) t^{beta2}`, `t > 0`.
pub fn eval_g(cfg: &ExponentConfig, s: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::SingularArgument(t));
    }
    Ok(cfg.big_m2 * (1.0 + powf(s.max(0.0), cfg.alpha2)) * powf(t, cfg.beta2))
}

/// Nodewise `min(z, R)`.
pub fn truncate(z: &RadialField, r: f64) -> RadialField {
    z.map(|v| v.min(r))
}

/// Lower and upper barriers for one value of `eps`.
#[derive(Debug, Clone)]
pub struct EnvelopeSet {
    pub eps: f64,
    pub r: f64,
    pub u_lo_factor: f64,
    pub v_lo_factor: f64,
    pub u_hi_factor: f64,
    pub v_hi_factor: f64,
    pub u_lo: RadialField,
    pub v_lo: RadialField,
    pub u_hi: RadialField,
    pub v_hi: RadialField,
}

/// Scalar multiples of the torsion functions `w1`, `w2`:
/// `u_lo = [m1 (R+1)^{alpha1}]^{1/(p1-1)} w1`,
/// `u_hi = [M1 eps^{alpha1} (1 + R^{beta1})]^{1/(p1-1)} w1`, and the mirror for `v`.
pub fn envelopes(cfg: &ExponentConfig, w1: &RadialField, w2: &RadialField, r: f64, eps: f64) -> Result<EnvelopeSet> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Epsilon(eps));
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("truncation level R = {r} must be >= 1")));
    }
    let g1 = 1.0 / (cfg.p1 - 1.0);
    let g2 = 1.0 / (cfg.p2 - 1.0);
    let u_lo_factor = powf(cfg.m1 * powf(r + 1.0, cfg.alpha1), g1);
    let v_lo_factor = powf(cfg.m2 * powf(r + 1.0, cfg.beta2), g2);
    let u_hi_factor = powf(cfg.big_m1 * powf(eps, cfg.alpha1) * (1.0 + powf(r, cfg.beta1)), g1);
    let v_hi_factor = powf(cfg.big_m2 * (1.0 + powf(r, cfg.alpha2)) * powf(eps, cfg.beta2), g2);
    Ok(EnvelopeSet {
        eps,
        r,
        u_lo_factor,
        v_lo_factor,
        u_hi_factor,
        v_hi_factor,
        u_lo: w1.scale(u_lo_factor),
        v_lo: w2.scale(v_lo_factor),
        u_hi: w1.scale(u_hi_factor),
        v_hi: w2.scale(v_hi_factor),
    })
}

/// Everything the Schauder map needs besides `eps`.
#[derive(Debug, Clone)]
pub struct ProblemContext {
    pub cfg: ExponentConfig,
    pub grid: Arc<RadialGrid>,
    pub boundary: Boundary,
    pub a1: RadialField,
    pub a2: RadialField,
    /// Torsion functions `-Delta_{p_i} w_i = a_i`.
    pub w1: RadialField,
    pub w2: RadialField,
    /// Truncation level `R` in `min(z, R)`.
    pub r: f64,
    /// `L^inf` bound certified against; `r` when not set separately.
    pub r_bound: f64,
    pub rho: f64,
    pub tests: TestFunctionSet,
}

pub const DEFAULT_TEST_COUNT: usize = 20;

impl ProblemContext {
    pub fn new(
        cfg: ExponentConfig,
        a1: &WeightSpec,
        a2: &WeightSpec,
        grid: Arc<RadialGrid>,
        boundary: Boundary,
        r: f64,
        rho: f64,
    ) -> Result<Self> {
        if grid.dim() != cfg.dim {
            return Err(Error::Grid(alloc::format!("grid dimension {} differs from N = {}", grid.dim(), cfg.dim)));
        }
        let w1 = plap::torsion(a1, cfg.p1, &grid, boundary)?;
        let w2 = plap::torsion(a2, cfg.p2, &grid, boundary)?;
        let tests = TestFunctionSet::polynomial_bumps(&grid, DEFAULT_TEST_COUNT);
        Ok(Self { a1: a1.sample(&grid), a2: a2.sample(&grid), w1, w2, tests, cfg, grid, boundary, r, r_bound: r, rho })
    }

    /// Context with the bounds of a report: truncation at the `rho`-based
    /// Moser bound, certification against `max{1, C5}` and `rho`.
    pub fn with_bounds(
        cfg: ExponentConfig,
        a1: &WeightSpec,
        a2: &WeightSpec,
        grid: Arc<RadialGrid>,
        boundary: Boundary,
        bounds: &BoundsReport,
    ) -> Result<Self> {
        let mut ctx = Self::new(cfg, a1, a2, grid, boundary, bounds.r_inf_from_rho, bounds.rho)?;
        ctx.r_bound = bounds.r_inf;
        Ok(ctx)
    }

    pub fn envelopes(&self, eps: f64) -> Result<EnvelopeSet> {
        envelopes(&self.cfg, &self.w1, &self.w2, self.r, eps)
    }

    /// `a1 f(min(z1,R)+eps, min(z2,R))` and `a2 g(min(z1,R), min(z2,R)+eps)`.
    pub fn regularized_rhs(&self, z1: &RadialField, z2: &RadialField, eps: f64) -> Result<(RadialField, RadialField)> {
        let r = self.r;
        let t1 = truncate(z1, r);
        let t2 = truncate(z2, r);
        self.rhs_pair(&t1, &t2, eps)
    }

    /// `a1 f(u+eps, v)` and `a2 g(u, v+eps)` without truncation.
    pub fn rhs_pair(&self, u: &RadialField, v: &RadialField, eps: f64) -> Result<(RadialField, RadialField)> {
        u.check_same_grid(v)?;
        let n = u.len();
        let mut h1 = Vec::with_capacity(n);
        let mut h2 = Vec::with_capacity(n);
        for j in 0..n {
            let (s, t) = (u.values()[j], v.values()[j]);
            h1.push(self.a1.values()[j] * eval_f(&self.cfg, s + eps, t)?);
            h2.push(self.a2.values()[j] * eval_g(&self.cfg, s, t + eps)?);
        }
        Ok((RadialField::new(self.grid.clone(), h1)?, RadialField::new(self.grid.clone(), h2)?))
    }

    /// Nodewise two-sided bounds `a1 m1 (R+1)^{alpha1} <= rhs1 <= a1 M1 eps^{alpha1} (1+R^{beta1})`
    /// and the mirror for `rhs2`. Returns the first failing node.
    pub fn rhs_bounds_violation(&self, h1: &RadialField, h2: &RadialField, eps: f64) -> Option<usize> {
        let c = &self.cfg;
        let r = self.r;
        let lo1 = c.m1 * powf(r + 1.0, c.alpha1);
        let hi1 = c.big_m1 * powf(eps, c.alpha1) * (1.0 + powf(r, c.beta1));
        let lo2 = c.m2 * powf(r + 1.0, c.beta2);
        let hi2 = c.big_m2 * (1.0 + powf(r, c.alpha2)) * powf(eps, c.beta2);
        (0..h1.len()).find(|&j| {
            let (a1, a2) = (self.a1.values()[j], self.a2.values()[j]);
            let (x, y) = (h1.values()[j], h2.values()[j]);
            x < a1 * lo1 || x > a1 * hi1 || y < a2 * lo2 || y > a2 * hi2
        })
    }
}

/// Largest amount by which `(u, v)` leaves the envelope box.
pub fn box_violation(u: &RadialField, v: &RadialField, env: &EnvelopeSet) -> (usize, f64) {
    let mut worst = (0, 0.0);
    let pairs = [(u, &env.u_lo, &env.u_hi), (v, &env.v_lo, &env.v_hi)];
    for (z, lo, hi) in pairs {
        for (j, ((x, l), h)) in z.values().iter().zip(lo.values()).zip(hi.values()).enumerate() {
            let d = (l - x).max(x - h);
            if d > worst.1 {
                worst = (j, d);
            }
        }
    }
    worst
}

fn clamp_to_box(z: &RadialField, lo: &RadialField, hi: &RadialField) -> RadialField {
    let vals = z.values().iter().zip(lo.values()).zip(hi.values()).map(|((x, l), h)| x.max(*l).min(*h)).collect();
    RadialField::from_values_unchecked(z.grid().clone(), vals)
}

/// Tolerance for inputs of [`schauder_map`] outside the envelope box.
pub const BOX_TOL: f64 = 1e-12;

/// One application of `T`.
pub fn schauder_map(
    z1: &RadialField,
    z2: &RadialField,
    env: &EnvelopeSet,
    ctx: &ProblemContext,
) -> Result<(RadialField, RadialField)> {
    let (node, violation) = box_violation(z1, z2, env);
    if violation > BOX_TOL {
        return Err(Error::EnvelopeViolation { node, violation });
    }
    let (h1, h2) = ctx.regularized_rhs(z1, z2, env.eps)?;
    if let Some(node) = ctx.rhs_bounds_violation(&h1, &h2, env.eps) {
        return Err(Error::InvalidArgument(alloc::format!("right-hand side leaves its two-sided bounds at node {node}")));
    }
    let u = plap::solve(&PLapProblem::new(ctx.cfg.p1, h1, ctx.boundary))?;
    let v = plap::solve(&PLapProblem::new(ctx.cfg.p2, h2, ctx.boundary))?;
    Ok((u, v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PicardOptions {
    pub theta: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { theta: 1.0, tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IterRecord {
    pub iter: usize,
    /// `max(||du||_{p1*}, ||dv||_{p2*})`
    pub distance: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub theta: f64,
    /// Envelope violation of the damped iterate before clamping.
    pub box_violation: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub u: RadialField,
    pub v: RadialField,
    pub eps: f64,
    pub iter: usize,
    pub theta: f64,
    pub converged: bool,
    pub history: Vec<IterRecord>,
}

impl SolverState {
    pub fn max_box_violation(&self) -> f64 {
        self.history.iter().fold(0.0, |m, r| m.max(r.box_violation))
    }

    pub fn final_distance(&self) -> f64 {
        self.history.last().map_or(f64::INFINITY, |r| r.distance)
    }
}

/// Damped iteration `z <- (1-theta) z + theta T(z)` from `start`, or from
/// the lower envelope when `start` is `None`.
///
/// `theta` is halved whenever the distance moved grows twice in a row. A
/// run that exhausts `max_iter` returns its last state with `converged = false`.
pub fn picard_solve(
    ctx: &ProblemContext,
    env: &EnvelopeSet,
    start: Option<(RadialField, RadialField)>,
    opts: &PicardOptions,
) -> Result<SolverState> {
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("damping theta = {} must lie in ]0, 1]", opts.theta)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("tolerance {} must be positive", opts.tol)));
    }
    let q1 = critical_exponent(ctx.cfg.dim, ctx.cfg.p1)?;
    let q2 = critical_exponent(ctx.cfg.dim, ctx.cfg.p2)?;
    let (mut u, mut v) = match start {
        Some((u, v)) => (clamp_to_box(&u, &env.u_lo, &env.u_hi), clamp_to_box(&v, &env.v_lo, &env.v_hi)),
        None => (env.u_lo.clone(), env.v_lo.clone()),
    };
    let mut theta = opts.theta;
    let mut history = Vec::new();
    let mut rises = 0;
    let mut converged = false;
    for iter in 1..=opts.max_iter {
        let (tu, tv) = schauder_map(&u, &v, env, ctx)?;
        let nu = u.zip_with(&tu, |a, b| (1.0 - theta) * a + theta * b)?;
        let nv = v.zip_with(&tv, |a, b| (1.0 - theta) * a + theta * b)?;
        let (_, box_violation) = box_violation(&nu, &nv, env);
        let nu = clamp_to_box(&nu, &env.u_lo, &env.u_hi);
        let nv = clamp_to_box(&nv, &env.v_lo, &env.v_hi);
        let du = nu.zip_with(&u, |a, b| a - b)?.lq_norm(q1)?;
        let dv = nv.zip_with(&v, |a, b| a - b)?.lq_norm(q2)?;
        let distance = du.max(dv);
        let rec = IterRecord { iter, distance, max_u: nu.max(), max_v: nv.max(), theta, box_violation };
        if let Some(prev) = history.last().map(|r: &IterRecord| r.distance) {
            rises = if distance > prev { rises + 1 } else { 0 };
        }
        history.push(rec);
        u = nu;
        v = nv;
        if distance < opts.tol {
            converged = true;
            break;
        }
        if rises >= 2 {
            theta *= 0.5;
            rises = 0;
        }
    }
    let iter = history.len();
    Ok(SolverState { u, v, eps: env.eps, iter, theta, converged, history })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BracketReport {
    pub violation: f64,
    pub node: usize,
    pub passed: bool,
}

pub const BRACKET_TOL: f64 = 1e-12;

/// Largest violation of `u_lo <= u <= u_hi`, `v_lo <= v <= v_hi`.
pub fn bracketing_check(u: &RadialField, v: &RadialField, env: &EnvelopeSet) -> BracketReport {
    let (node, violation) = box_violation(u, v, env);
    BracketReport { violation, node, passed: violation <= BRACKET_TOL }
}

/// Sides of the superlevel-set inequality for one test function.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TruncatedPair {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TruncatedReport {
    pub u: Vec<TruncatedPair>,
    pub v: Vec<TruncatedPair>,
    /// Nodes with `u > 1` (resp. `v > 1`).
    pub u_nodes: usize,
    pub v_nodes: usize,
    pub worst_excess: f64,
    pub passed: bool,
}

/// Discrete form of
/// `int_{u>1} |u'|^{p1-2} u' phi' <= M1 int_{u>1} a1 (1 + v^{beta1}) phi`
/// and the mirror for `v`. The left side runs over cells with both ends in
/// the superlevel set, the right side over its nodes with the lumped mass.
pub fn truncated_inequality_check(
    u: &RadialField,
    v: &RadialField,
    cfg: &ExponentConfig,
    a1: &RadialField,
    a2: &RadialField,
    tests: &TestFunctionSet,
    tol: f64,
) -> Result<TruncatedReport> {
    u.check_same_grid(v)?;
    u.check_same_grid(a1)?;
    u.check_same_grid(a2)?;
    let grid = u.grid();
    let mu = grid.cell_measure();
    let mass = grid.hat_mass();

    let side = |w: &RadialField, other: &RadialField, a: &RadialField, p: f64, big_m: f64, e: f64| -> Result<Vec<TruncatedPair>> {
        let inside: Vec<bool> = w.values().iter().map(|&x| x > 1.0).collect();
        let dw = w.cell_gradient();
        let mut out = Vec::with_capacity(tests.len());
        for phi in &tests.functions {
            phi.check_same_grid(w)?;
            let dphi = phi.cell_gradient();
            let mut lhs = 0.0;
            for k in 0..dw.len() {
                if inside[k] && inside[k + 1] {
                    lhs += mu[k] * plap::phi_p(dw[k], p) * dphi[k];
                }
            }
            let mut rhs = 0.0;
            for j in 0..w.len() {
                if inside[j] {
                    rhs += a.values()[j] * (1.0 + powf(other.values()[j].max(0.0), e)) * phi.values()[j] * mass[j];
                }
            }
            out.push(TruncatedPair { lhs, rhs: big_m * rhs });
        }
        Ok(out)
    };
    let pu = side(u, v, a1, cfg.p1, cfg.big_m1, cfg.beta1)?;
    let pv = side(v, u, a2, cfg.p2, cfg.big_m2, cfg.alpha2)?;
    let worst_excess = pu.iter().chain(&pv).fold(f64::NEG_INFINITY, |m, t| m.max(t.lhs - t.rhs));
    Ok(TruncatedReport {
        u_nodes: u.values().iter().filter(|&&x| x > 1.0).count(),
        v_nodes: v.values().iter().filter(|&&x| x > 1.0).count(),
        passed: worst_excess <= tol,
        worst_excess,
        u: pu,
        v: pv,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StageReport {
    pub index: usize,
    pub eps: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_distance: f64,
    pub theta: f64,
    pub max_box_violation: f64,
    pub bracketing: BracketReport,
    pub u_lo_factor: f64,
    pub u_hi_factor: f64,
    pub v_lo_factor: f64,
    pub v_hi_factor: f64,
    pub u0: f64,
    pub v0: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub lpstar_u: f64,
    pub lpstar_v: f64,
    /// `D^{1,p_i}` distance to the previous stage.
    pub d1p_u: Option<f64>,
    pub d1p_v: Option<f64>,
    pub residual_u: f64,
    pub residual_v: f64,
    pub history: Vec<IterRecord>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContinuationOptions {
    pub schedule: Vec<f64>,
    pub picard: PicardOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { schedule: default_schedule(6), picard: PicardOptions::default() }
    }
}

/// `eps_k = 1 / (4 * 2^k)`, `k = 0, ..., steps-1`.
pub fn default_schedule(steps: usize) -> Vec<f64> {
    (0..steps).map(|k| 0.25 / (1u64 << k) as f64).collect()
}

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub stages: Vec<StageReport>,
    pub state: SolverState,
    pub envelopes: EnvelopeSet,
    /// Stage at which a non-converged Picard run stopped the schedule.
    pub aborted_at: Option<usize>,
}

/// Weak residuals of `-Delta_{p1} u = a1 f(u+eps, v)` and
/// `-Delta_{p2} v = a2 g(u, v+eps)` against the context's test functions.
pub fn residuals(ctx: &ProblemContext, u: &RadialField, v: &RadialField, eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (h1, h2) = ctx.rhs_pair(u, v, eps)?;
    Ok((
        plap::weak_residual(u, &h1, ctx.cfg.p1, &ctx.tests)?,
        plap::weak_residual(v, &h2, ctx.cfg.p2, &ctx.tests)?,
    ))
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, &x| m.max(x))
}

/// Picard runs along a decreasing `eps` schedule, each warm-started from
/// the previous solution.
pub fn continuation(ctx: &ProblemContext, opts: &ContinuationOptions) -> Result<ContinuationResult> {
    let sched = &opts.schedule;
    if sched.is_empty() {
        return Err(Error::InvalidArgument("empty eps schedule".into()));
    }
    if let Some(&e) = sched.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::Epsilon(e));
    }
    if sched.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("eps schedule must be strictly decreasing".into()));
    }
    let q1 = critical_exponent(ctx.cfg.dim, ctx.cfg.p1)?;
    let q2 = critical_exponent(ctx.cfg.dim, ctx.cfg.p2)?;

    let mut stages: Vec<StageReport> = Vec::with_capacity(sched.len());
    let mut prev: Option<SolverState> = None;
    let mut last_env = None;
    for (index, &eps) in sched.iter().enumerate() {
        let env = ctx.envelopes(eps)?;
        let start = prev.as_ref().map(|s| (s.u.clone(), s.v.clone()));
        let state = picard_solve(ctx, &env, start, &opts.picard)?;
        let (ru, rv) = residuals(ctx, &state.u, &state.v, eps)?;
        let (d1p_u, d1p_v) = match &prev {
            Some(p) => (
                Some(state.u.zip_with(&p.u, |a, b| a - b)?.grad_seminorm(ctx.cfg.p1)?),
                Some(state.v.zip_with(&p.v, |a, b| a - b)?.grad_seminorm(ctx.cfg.p2)?),
            ),
            None => (None, None),
        };
        stages.push(StageReport {
            index,
            eps,
            iterations: state.iter,
            converged: state.converged,
            final_distance: state.final_distance(),
            theta: state.theta,
            max_box_violation: state.max_box_violation(),
            bracketing: bracketing_check(&state.u, &state.v, &env),
            u_lo_factor: env.u_lo_factor,
            u_hi_factor: env.u_hi_factor,
            v_lo_factor: env.v_lo_factor,
            v_hi_factor: env.v_hi_factor,
            u0: state.u.values()[0],
            v0: state.v.values()[0],
            max_u: state.u.max(),
            max_v: state.v.max(),
            lpstar_u: state.u.lq_norm(q1)?,
            lpstar_v: state.v.lq_norm(q2)?,
            d1p_u,
            d1p_v,
            residual_u: max_of(&ru),
            residual_v: max_of(&rv),
            history: state.history.clone(),
        });
        let converged = state.converged;
        prev = Some(state);
        last_env = Some(env);
        if !converged {
            return Ok(ContinuationResult {
                stages,
                state: prev.unwrap(),
                envelopes: last_env.unwrap(),
                aborted_at: Some(index),
            });
        }
    }
    Ok(ContinuationResult { stages, state: prev.unwrap(), envelopes: last_env.unwrap(), aborted_at: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificationTolerances {
    pub bracket: f64,
    pub residual: f64,
}

impl Default for CertificationTolerances {
    fn default() -> Self {
        Self { bracket: BRACKET_TOL, residual: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Certificate {
    pub eps: f64,
    pub all_converged: bool,
    pub max_box_violation: f64,
    pub bracketing: BracketReport,
    pub bracketing_passed: bool,
    pub lower_positive: bool,
    pub max_u: f64,
    pub max_v: f64,
    pub r_inf: f64,
    pub linf_passed: bool,
    pub truncation_level: f64,
    /// `max u, max v <= truncation level`, so the fixed point solves the untruncated problem.
    pub truncation_inactive: bool,
    pub lpstar_u: f64,
    pub lpstar_v: f64,
    pub rho: f64,
    pub lpstar_passed: bool,
    pub residual_u: f64,
    pub residual_v: f64,
    pub residual_passed: bool,
    /// `D^{1,p}` distances between consecutive stages, `max` over `u` and `v`.
    pub d1p_distances: Vec<f64>,
    /// Whether the last three distances decrease strictly; `None` with fewer than three.
    pub d1p_decreasing: Option<bool>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Final checks on a continuation run.
pub fn certify(ctx: &ProblemContext, run: &ContinuationResult, tol: &CertificationTolerances) -> Result<Certificate> {
    let last = run.stages.last().ok_or_else(|| Error::InvalidArgument("no stages to certify".into()))?;
    let s = &run.state;
    let all_converged = run.aborted_at.is_none() && run.stages.iter().all(|st| st.converged);
    let max_box_violation = run.stages.iter().fold(0.0_f64, |m, st| m.max(st.max_box_violation));
    let bracketing = bracketing_check(&s.u, &s.v, &run.envelopes);
    let bracketing_passed = bracketing.violation <= tol.bracket && max_box_violation <= tol.bracket;
    let interior = s.u.len() - 1;
    let lower_positive = (0..interior).all(|j| {
        s.u.values()[j] >= run.envelopes.u_lo.values()[j]
            && run.envelopes.u_lo.values()[j] > 0.0
            && s.v.values()[j] >= run.envelopes.v_lo.values()[j]
            && run.envelopes.v_lo.values()[j] > 0.0
    }) || (ctx.boundary == Boundary::Dirichlet && (0..interior).all(|j| s.u.values()[j] > 0.0 && s.v.values()[j] > 0.0));
    let (max_u, max_v) = (s.u.max(), s.v.max());
    let linf_passed = max_u <= ctx.r_bound && max_v <= ctx.r_bound;
    let truncation_inactive = max_u <= ctx.r && max_v <= ctx.r;
    let lpstar_passed = last.lpstar_u <= ctx.rho && last.lpstar_v <= ctx.rho;
    let residual_passed = last.residual_u <= tol.residual && last.residual_v <= tol.residual;
    let d1p_distances: Vec<f64> = run
        .stages
        .iter()
        .filter_map(|st| Some(st.d1p_u?.max(st.d1p_v?)))
        .collect();
    let d1p_decreasing = (d1p_distances.len() >= 3).then(|| {
        let t = &d1p_distances[d1p_distances.len() - 3..];
        t[1] < t[0] && t[2] < t[1]
    });

    let mut failures = Vec::new();
    let mut need = |ok: bool, name: &str| {
        if !ok {
            failures.push(String::from(name));
        }
    };
    need(all_converged, "picard convergence");
    need(bracketing_passed, "bracketing");
    need(lower_positive, "positive lower barrier");
    need(linf_passed, "L^inf bound");
    need(truncation_inactive, "truncation inactive");
    need(lpstar_passed, "L^p* bound");
    need(residual_passed, "weak residual");
    need(d1p_decreasing != Some(false), "D^{1,p} distances decreasing");
    Ok(Certificate {
        eps: s.eps,
        all_converged,
        max_box_violation,
        bracketing,
        bracketing_passed,
        lower_positive,
        max_u,
        max_v,
        r_inf: ctx.r_bound,
        linf_passed,
        truncation_level: ctx.r,
        truncation_inactive,
        lpstar_u: last.lpstar_u,
        lpstar_v: last.lpstar_v,
        rho: ctx.rho,
        lpstar_passed,
        residual_u: last.residual_u,
        residual_v: last.residual_v,
        residual_passed,
        d1p_distances,
        d1p_decreasing,
        passed: failures.is_empty(),
        failures,
    })
}

/// Which side a quantity belongs to, for report labels.
pub fn side_label(side: Side) -> &'static str {
    match side {
        Side::U => "u",
        Side::V => "v",
    }
}
