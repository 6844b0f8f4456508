//! A priori constants: the `L^{p*}` bound `rho`, the Moser `L^inf` bound `R`,
//! and the strong-monotonicity inequalities for `a -> |a|^{p-2} a`.
//!
//! Every constant is a number here. Sobolev embeddings use Talenti's optimal
//! constants `S` in `||w||_{p*} <= S ||grad w||_p` on `R^N`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hypotheses::{conjugate, critical_exponent, derive_exponents, ExponentConfig, Side};
use crate::math::{lgamma, ln, powf, sqrt};
use crate::weights::WeightNorms;

/// Optimal constant `S` in `||w||_{p*} <= S ||grad w||_p` on `R^N`, `1 < p < N`.
pub fn talenti_constant(dim: usize, p: f64) -> Result<f64> {
    let n = dim as f64;
    if !(p > 1.0 && p < n) {
        return Err(Error::ExponentRange { p, dim });
    }
    let log_ratio = lgamma(1.0 + 0.5 * n) + lgamma(n) - lgamma(n / p) - lgamma(1.0 + n - n / p);
    let log_s = -0.5 * ln(core::f64::consts::PI) - ln(n) / p
        + (1.0 - 1.0 / p) * ln((p - 1.0) / (n - p))
        + log_ratio / n;
    Ok(crate::math::exp(log_s))
}

/// Strong-monotonicity constant `C_p` used by [`simon_check`].
///
/// `p >= 2`: `2^{2-p}` in `(phi(a)-phi(b)).(a-b) >= C_p |a-b|^p`.
/// `1 < p < 2`: `p-1` in `(phi(a)-phi(b)).(a-b) >= C_p |a-b|^2 (|a|+|b|)^{p-2}`.
pub fn simon_constant(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("simon exponent p = {p} must exceed 1")));
    }
    Ok(if p >= 2.0 { powf(2.0, 2.0 - p) } else { p - 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SobolevConstants {
    pub s1: f64,
    pub s2: f64,
    pub simon_p1: f64,
    pub simon_p2: f64,
}

impl SobolevConstants {
    pub fn talenti(cfg: &ExponentConfig) -> Result<Self> {
        Ok(Self {
            s1: talenti_constant(cfg.dim, cfg.p1)?,
            s2: talenti_constant(cfg.dim, cfg.p2)?,
            simon_p1: simon_constant(cfg.p1)?,
            simon_p2: simon_constant(cfg.p2)?,
        })
    }

    pub fn s(&self, side: Side) -> f64 {
        match side {
            Side::U => self.s1,
            Side::V => self.s2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SimonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluate both sides of the strong-monotonicity inequality at `(a, b)`.
pub fn simon_check(a: &[f64], b: &[f64], p: f64) -> Result<SimonCheck> {
    let c = simon_constant(p)?;
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch { expected: a.len(), got: b.len() });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite vector entry".into()));
    }
    let norm = |x: &[f64]| sqrt(x.iter().map(|v| v * v).sum());
    let (na, nb) = (norm(a), norm(b));
    let fa = if na > 0.0 { powf(na, p - 2.0) } else { 0.0 };
    let fb = if nb > 0.0 { powf(nb, p - 2.0) } else { 0.0 };
    let mut lhs = 0.0;
    let mut diff2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        lhs += (fa * x - fb * y) * d;
        diff2 += d * d;
    }
    let rhs = if p >= 2.0 {
        c * powf(diff2, 0.5 * p)
    } else {
        if na + nb == 0.0 {
            return Err(Error::InvalidArgument("a and b both zero with p < 2".into()));
        }
        c * diff2 * powf(na + nb, p - 2.0)
    };
    let holds = lhs >= rhs - 1e-12 * (1.0 + rhs.abs());
    Ok(SimonCheck { lhs, rhs, holds })
}

/// Gradient-norm bounds produced by one branch of the case analysis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CaseBound {
    pub case: String,
    pub grad_u: f64,
    pub grad_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LpStarBound {
    pub c1: f64,
    pub c2: f64,
    /// `p1 - 1 - alpha1 - alpha2`
    pub e1: f64,
    /// `p2 - 1 - beta1 - beta2`
    pub e2: f64,
    pub cases: Vec<CaseBound>,
    pub grad_u: f64,
    pub grad_v: f64,
    pub rho: f64,
    pub case_taken: String,
}

/// Working constants `C1 = M1 S1^{alpha1+1} max(1, S2^{beta1})` and the mirror `C2`.
pub fn working_constants(cfg: &ExponentConfig, s: &SobolevConstants) -> (f64, f64) {
    let c1 = cfg.big_m1 * powf(s.s1, cfg.alpha1 + 1.0) * powf(s.s2, cfg.beta1).max(1.0);
    let c2 = cfg.big_m2 * powf(s.s2, cfg.beta2 + 1.0) * powf(s.s1, cfg.alpha2).max(1.0);
    (c1, c2)
}

/// `rho` from the Sobolev constants of `cfg`.
pub fn lpstar_apriori(
    cfg: &ExponentConfig,
    a1: &WeightNorms,
    a2: &WeightNorms,
    s: &SobolevConstants,
) -> Result<LpStarBound> {
    let (c1, c2) = working_constants(cfg, s);
    lpstar_with_constants(cfg, a1, a2, c1, c2, s.s1, s.s2)
}

/// The four-case bound on `(||grad u||, ||grad v||)` for given working constants,
/// then `rho = max(S1 ||grad u||, S2 ||grad v||)` over all cases.
pub fn lpstar_with_constants(
    cfg: &ExponentConfig,
    a1: &WeightNorms,
    a2: &WeightNorms,
    c1: f64,
    c2: f64,
    s1: f64,
    s2: f64,
) -> Result<LpStarBound> {
    let e1 = cfg.p1 - 1.0 - cfg.alpha1 - cfg.alpha2;
    let e2 = cfg.p2 - 1.0 - cfg.beta1 - cfg.beta2;
    if !(e1 > 0.0) || !(e2 > 0.0) {
        return Err(Error::Inadmissible(alloc::format!(
            "growth exponents must be positive: p1-1-alpha1-alpha2 = {e1}, p2-1-beta1-beta2 = {e2}"
        )));
    }
    let g1 = c1 * a1.gamma;
    let g2 = c2 * a2.gamma;
    let k = c1 * a1.delta + c2 * a2.delta;
    let root = |x: f64, e: f64| powf(x, 1.0 / e);

    let x_small = root(g2, e1);
    let y_small = root(g1, e2);
    let x_large = root(k / powf(g2, cfg.alpha2 / e1) + g2, e1);
    let y_large = root(k / powf(g1, cfg.beta1 / e2) + g1, e2);
    let y_mixed = root(c2 * (a2.delta + a2.gamma * powf(g2, cfg.alpha2 / e1)), cfg.p2 - 1.0 - cfg.beta2);
    let x_mixed = root(c1 * (a1.delta + a1.gamma * powf(g1, cfg.beta1 / e2)), cfg.p1 - 1.0 - cfg.alpha1);

    let cases = alloc::vec![
        CaseBound { case: "both small".into(), grad_u: x_small, grad_v: y_small },
        CaseBound { case: "both large".into(), grad_u: x_large, grad_v: y_large },
        CaseBound { case: "u small, v large".into(), grad_u: x_small, grad_v: y_mixed },
        CaseBound { case: "u large, v small".into(), grad_u: x_mixed, grad_v: y_small },
    ];
    let grad_u = cases.iter().fold(0.0_f64, |m, c| m.max(c.grad_u));
    let grad_v = cases.iter().fold(0.0_f64, |m, c| m.max(c.grad_v));
    let rho = (s1 * grad_u).max(s2 * grad_v);
    if !rho.is_finite() {
        return Err(Error::InvalidArgument("non-finite rho".into()));
    }
    Ok(LpStarBound { c1, c2, e1, e2, cases, grad_u, grad_v, rho, case_taken: "max over cases".into() })
}

/// Moser exponent sequence and the sums entering `C5`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KappaSequence {
    pub xi: f64,
    pub xi_conj: f64,
    /// `p* / (p xi')`, the limit of `(kappa_n + 1) / (kappa_{n-1} + 1)`.
    pub ratio_limit: f64,
    /// `kappa_0, kappa_1, ..., kappa_n`
    pub kappa: Vec<f64>,
    /// `sum_{i>=1} 1/(kappa_i + 1)`
    pub inv_sum: f64,
    /// `sum_{i>=1} eta(kappa_i) = inv_sum / p`
    pub eta_sum: f64,
    /// `sum_{i>=1} 1/sqrt(kappa_i + 1)`
    pub sqrt_sum: f64,
    pub tail_bound: f64,
    pub n_terms: usize,
    /// Smallest slack of `1/xi < 1 - (kappa p + 1)/((kappa + 1) p*)` over the sequence.
    pub cond_k_margin: f64,
}

impl KappaSequence {
    pub fn last_ratio(&self) -> f64 {
        let n = self.kappa.len();
        (self.kappa[n - 1] + 1.0) / (self.kappa[n - 2] + 1.0)
    }
}

/// Limits on [`kappa_sequence`].
pub const MAX_KAPPA_TERMS: usize = 100_000;

/// Generate `(kappa_n p + 1) xi' = (kappa_{n-1} + 1) p*` until both tails
/// fall below `tol`, with at least `min_terms` terms after `kappa_0`.
pub fn kappa_sequence(
    dim: usize,
    p: f64,
    zeta: f64,
    xi: f64,
    kappa0: f64,
    tol: f64,
    min_terms: usize,
) -> Result<KappaSequence> {
    let ps = critical_exponent(dim, p)?;
    let lower = ps / (ps - p);
    if !(xi > lower && xi < zeta) {
        return Err(Error::XiOutOfRange { xi, lower, upper: zeta });
    }
    if !(kappa0 >= 0.0) || !kappa0.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("kappa0 = {kappa0} must be >= 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("tail tolerance {tol} must be positive")));
    }
    let xi_conj = conjugate(xi);
    let r = ps / (p * xi_conj);
    let cond = |k: f64| 1.0 - (k * p + 1.0) / ((k + 1.0) * ps) - 1.0 / xi;

    let mut kappa = alloc::vec![kappa0];
    let mut cond_k_margin = cond(kappa0);
    let (mut inv_sum, mut sqrt_sum) = (0.0, 0.0);
    let mut tail_bound = f64::INFINITY;
    let mut n = 0;
    while n < MAX_KAPPA_TERMS {
        let prev = kappa[n];
        let next = ((prev + 1.0) * ps / xi_conj - 1.0) / p;
        kappa.push(next);
        n += 1;
        let x = next + 1.0;
        inv_sum += 1.0 / x;
        sqrt_sum += 1.0 / sqrt(x);
        cond_k_margin = cond_k_margin.min(cond(next));
        let tail_inv = (1.0 / x) / (r - 1.0);
        let tail_sqrt = (1.0 / sqrt(x)) / (sqrt(r) - 1.0);
        tail_bound = tail_inv.max(tail_sqrt);
        if n >= min_terms && tail_bound < tol {
            break;
        }
    }
    if !(tail_bound < tol) {
        return Err(Error::InvalidArgument(alloc::format!(
            "kappa tail {tail_bound} above {tol} after {MAX_KAPPA_TERMS} terms"
        )));
    }
    Ok(KappaSequence {
        xi,
        xi_conj,
        ratio_limit: r,
        kappa,
        inv_sum,
        eta_sum: inv_sum / p,
        sqrt_sum,
        tail_bound,
        n_terms: n,
        cond_k_margin,
    })
}

/// `sup_{t >= 0} [(t+1)/(t p + 1)^{1/p}]^{1/sqrt(t+1)}` over `[0, t_max]`:
/// a log grid followed by golden-section refinement around the best node.
pub fn moser_c4(p: f64, t_max: f64, grid_points: usize) -> Result<C4Estimate> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("C4 exponent p = {p} must exceed 1")));
    }
    let logf = |t: f64| (ln(t + 1.0) - ln(t * p + 1.0) / p) / sqrt(t + 1.0);
    let n = grid_points.max(8);
    let (lo, hi) = (ln(1e-8), ln(t_max));
    let node = |i: usize| if i == 0 { 0.0 } else { crate::math::exp(lo + (hi - lo) * (i - 1) as f64 / (n - 2) as f64) };
    let mut best = 0;
    let mut best_val = logf(0.0);
    for i in 1..n {
        let v = logf(node(i));
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let mut a = node(best.saturating_sub(1));
    let mut b = node((best + 1).min(n - 1));
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if logf(c) > logf(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if b - a < 1e-14 * (1.0 + b) {
            break;
        }
    }
    let t = 0.5 * (a + b);
    let val = logf(t).max(best_val);
    Ok(C4Estimate { p, argmax: t, value: crate::math::exp(val), interior: best > 0 && best < n - 1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct C4Estimate {
    pub p: f64,
    pub argmax: f64,
    pub value: f64,
    pub interior: bool,
}

pub const C4_T_MAX: f64 = 1e4;
pub const C4_GRID: usize = 4001;

/// The Moser iteration on one side of the system.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MoserTrace {
    pub side: Side,
    pub sequence: KappaSequence,
    pub c3: f64,
    pub c4: f64,
    pub coupling_factor: f64,
    pub c5: f64,
    /// `max(1, rho) max(1, C3)^{sum eta} C4^{sum 1/sqrt(kappa+1)} (1 + rho^{e})^{sum eta}`:
    /// the same chain started from `||u||_{p*} <= rho` instead of a unit base norm.
    pub c5_from_rho: f64,
}

/// Inputs for the Moser bound that are not fixed by the exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MoserOptions {
    /// `None` picks the midpoint of the admissible interval.
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub kappa0: f64,
    pub tail_tol: f64,
    pub min_terms: usize,
}

impl Default for MoserOptions {
    fn default() -> Self {
        Self { xi1: None, xi2: None, kappa0: 0.0, tail_tol: 1e-10, min_terms: 20 }
    }
}

impl MoserOptions {
    pub fn xi(&self, side: Side) -> Option<f64> {
        match side {
            Side::U => self.xi1,
            Side::V => self.xi2,
        }
    }
}

/// `C5 = C3^{sum eta} C4^{sum 1/sqrt(kappa+1)} (1 + rho^{e})^{sum eta}` with
/// `C3 = M S^p (||a||_xi + ||a||_zeta)` and `e` the coupling exponent
/// (`beta1` for `u`, `alpha2` for `v`).
///
/// `norms.xi` must be the norm at the `xi` actually used.
#[allow(clippy::too_many_arguments)]
pub fn moser_side(
    cfg: &ExponentConfig,
    side: Side,
    xi: f64,
    rho: f64,
    norms: &WeightNorms,
    s: &SobolevConstants,
    opts: &MoserOptions,
    c4: &dyn Fn(f64) -> f64,
) -> Result<MoserTrace> {
    let p = cfg.p(side);
    let sequence = kappa_sequence(cfg.dim, p, cfg.zeta(side), xi, opts.kappa0, opts.tail_tol, opts.min_terms)?;
    let c3 = cfg.upper_constant(side) * powf(s.s(side), p) * (norms.xi + norms.zeta);
    let c4 = c4(p);
    let coupling_factor = 1.0 + powf(rho, cfg.coupling_exponent(side));
    let c5 = powf(c3, sequence.eta_sum) * powf(c4, sequence.sqrt_sum) * powf(coupling_factor, sequence.eta_sum);
    let c5_from_rho = rho.max(1.0)
        * powf(c3.max(1.0), sequence.eta_sum)
        * powf(c4, sequence.sqrt_sum)
        * powf(coupling_factor, sequence.eta_sum);
    if !c5.is_finite() || !c5_from_rho.is_finite() {
        return Err(Error::InvalidArgument("non-finite C5".into()));
    }
    Ok(MoserTrace { side, sequence, c3, c4, coupling_factor, c5, c5_from_rho })
}

/// Full constant ledger for one configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundsReport {
    pub constant_convention: String,
    pub sobolev: SobolevConstants,
    pub lpstar: LpStarBound,
    pub rho: f64,
    pub moser_u: MoserTrace,
    pub moser_v: MoserTrace,
    /// `max{1, C5_u, C5_v}`
    pub r_inf: f64,
    /// `max{1, C5_u, C5_v}` with the chains started from `rho`; never below `r_inf`.
    pub r_inf_from_rho: f64,
}

/// `rho` and `R = max{1, C5_u, C5_v}`.
///
/// `a1`, `a2` must carry their `xi` norms at the exponents resolved from `opts`.
pub fn compute_bounds(
    cfg: &ExponentConfig,
    a1: &WeightNorms,
    a2: &WeightNorms,
    opts: &MoserOptions,
    c4: &dyn Fn(f64) -> f64,
) -> Result<BoundsReport> {
    let d = derive_exponents(cfg)?;
    let s = SobolevConstants::talenti(cfg)?;
    let lpstar = lpstar_apriori(cfg, a1, a2, &s)?;
    let rho = lpstar.rho;
    let xi1 = opts.xi1.unwrap_or_else(|| d.xi1_range.midpoint());
    let xi2 = opts.xi2.unwrap_or_else(|| d.xi2_range.midpoint());
    let moser_u = moser_side(cfg, Side::U, xi1, rho, a1, &s, opts, c4)?;
    let moser_v = moser_side(cfg, Side::V, xi2, rho, a2, &s, opts, c4)?;
    let r_inf = 1.0_f64.max(moser_u.c5).max(moser_v.c5);
    let r_inf_from_rho = r_inf.max(moser_u.c5_from_rho).max(moser_v.c5_from_rho);
    Ok(BoundsReport {
        constant_convention: "Talenti optimal Sobolev constants".into(),
        sobolev: s,
        lpstar,
        rho,
        moser_u,
        moser_v,
        r_inf,
        r_inf_from_rho,
    })
}

/// Uncached [`moser_c4`] value with the default search window.
pub fn c4_uncached(p: f64) -> f64 {
    moser_c4(p, C4_T_MAX, C4_GRID).map(|e| e.value).unwrap_or(f64::NAN)
}
