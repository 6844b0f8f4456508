//! Exponent configuration of the system, its admissibility conditions and the
//! integrability exponents derived from it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Selects one of the two equations of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    /// The `u` equation, driven by `a1 f(u, v)`.
    U,
    /// The `v` equation, driven by `a2 g(u, v)`.
    V,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::U, Side::V];
}

/// Exponents and structural constants of the system.
///
/// `alpha1`, `beta2` are the singular exponents in `(-1, 0)`; `alpha2`,
/// `beta1` the positive coupling exponents. `m*` / `big_m*` are the lower and
/// upper growth constants of the nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentConfig {
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub dim: usize,
    pub p1: f64,
    pub p2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub m1: f64,
    #[cfg_attr(feature = "serde", serde(rename = "M1"))]
    pub big_m1: f64,
    pub m2: f64,
    #[cfg_attr(feature = "serde", serde(rename = "M2"))]
    pub big_m2: f64,
    pub zeta1: f64,
    pub zeta2: f64,
}

impl ExponentConfig {
    /// Reference configuration used throughout the tests: `N = 3`,
    /// `p1 = p2 = 2`, `alpha1 = beta2 = -1/2`, `beta1 = alpha2 = 1/2`,
    /// unit growth constants and `zeta1 = zeta2 = 4`.
    pub fn standard() -> Self {
        Self {
            dim: 3,
            p1: 2.0,
            p2: 2.0,
            alpha1: -0.5,
            alpha2: 0.5,
            beta1: 0.5,
            beta2: -0.5,
            m1: 1.0,
            big_m1: 1.0,
            m2: 1.0,
            big_m2: 1.0,
            zeta1: 4.0,
            zeta2: 4.0,
        }
    }

    pub fn p(&self, side: Side) -> f64 {
        match side {
            Side::U => self.p1,
            Side::V => self.p2,
        }
    }

    pub fn zeta(&self, side: Side) -> f64 {
        match side {
            Side::U => self.zeta1,
            Side::V => self.zeta2,
        }
    }

    pub fn lower_constant(&self, side: Side) -> f64 {
        match side {
            Side::U => self.m1,
            Side::V => self.m2,
        }
    }

    pub fn upper_constant(&self, side: Side) -> f64 {
        match side {
            Side::U => self.big_m1,
            Side::V => self.big_m2,
        }
    }

    /// Singular exponent of the equation (`alpha1` for `u`, `beta2` for `v`).
    pub fn singular_exponent(&self, side: Side) -> f64 {
        match side {
            Side::U => self.alpha1,
            Side::V => self.beta2,
        }
    }

    /// Coupling exponent of the other unknown (`beta1` for `u`, `alpha2` for `v`).
    pub fn coupling_exponent(&self, side: Side) -> f64 {
        match side {
            Side::U => self.beta1,
            Side::V => self.alpha2,
        }
    }
}

/// Critical Sobolev exponent `N p / (N - p)`.
pub fn critical_exponent(dim: usize, p: f64) -> Result<f64> {
    let n = dim as f64;
    if !(p > 1.0 && p < n) {
        return Err(Error::ExponentRange { p, dim });
    }
    Ok(n * p / (n - p))
}

/// Hölder conjugate `q / (q - 1)`.
pub fn conjugate(q: f64) -> f64 {
    q / (q - 1.0)
}

/// Open interval `]lower, upper[` for the free Moser exponent `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct XiRange {
    pub lower: f64,
    pub upper: f64,
    pub empty: bool,
}

impl XiRange {
    fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper, empty: !(lower < upper) }
    }

    pub fn contains(&self, xi: f64) -> bool {
        xi > self.lower && xi < self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Exponents derived in closed form from an [`ExponentConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DerivedExponents {
    pub p1_star: f64,
    pub p2_star: f64,
    /// `(p_i^*)'`, the conjugate of the critical exponent.
    pub p1_star_conj: f64,
    pub p2_star_conj: f64,
    pub t1: f64,
    pub t2: f64,
    pub s1: f64,
    pub s2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub xi1_range: XiRange,
    pub xi2_range: XiRange,
    pub zeta1_min: f64,
    pub zeta2_min: f64,
}

impl DerivedExponents {
    pub fn p_star(&self, side: Side) -> f64 {
        match side {
            Side::U => self.p1_star,
            Side::V => self.p2_star,
        }
    }

    pub fn p_star_conj(&self, side: Side) -> f64 {
        match side {
            Side::U => self.p1_star_conj,
            Side::V => self.p2_star_conj,
        }
    }

    pub fn gamma(&self, side: Side) -> f64 {
        match side {
            Side::U => self.gamma1,
            Side::V => self.gamma2,
        }
    }

    pub fn delta(&self, side: Side) -> f64 {
        match side {
            Side::U => self.delta1,
            Side::V => self.delta2,
        }
    }

    pub fn xi_range(&self, side: Side) -> XiRange {
        match side {
            Side::U => self.xi1_range,
            Side::V => self.xi2_range,
        }
    }
}

pub fn derive_exponents(cfg: &ExponentConfig) -> Result<DerivedExponents> {
    let p1s = critical_exponent(cfg.dim, cfg.p1)?;
    let p2s = critical_exponent(cfg.dim, cfg.p2)?;

    let t1 = (cfg.alpha1 + 1.0) / p1s + cfg.beta1 / p2s;
    let t2 = cfg.alpha2 / p1s + (cfg.beta2 + 1.0) / p2s;
    let s1 = (cfg.alpha1 + 1.0) / p1s;
    let s2 = (cfg.beta2 + 1.0) / p2s;

    Ok(DerivedExponents {
        p1_star: p1s,
        p2_star: p2s,
        p1_star_conj: conjugate(p1s),
        p2_star_conj: conjugate(p2s),
        t1,
        t2,
        s1,
        s2,
        gamma1: 1.0 / (1.0 - t1),
        gamma2: 1.0 / (1.0 - t2),
        delta1: 1.0 / (1.0 - s1),
        delta2: 1.0 / (1.0 - s2),
        xi1_range: XiRange::new(p1s / (p1s - cfg.p1), cfg.zeta1),
        xi2_range: XiRange::new(p2s / (p2s - cfg.p2), cfg.zeta2),
        zeta1_min: 1.0 / (1.0 - cfg.p1 / p1s - cfg.beta1 / p2s),
        zeta2_min: 1.0 / (1.0 - cfg.p2 / p2s - cfg.alpha2 / p1s),
    })
}

/// One inequality of the hypotheses with its signed slack `rhs - lhs`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Check {
    pub name: String,
    pub satisfied: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self { checks: Vec::new(), overall: true }
    }

    /// Strict inequality: passes when `margin > 0`.
    pub fn strict(&mut self, name: &str, margin: f64) {
        self.push(name, margin, margin > 0.0);
    }

    /// Non-strict inequality: passes when `margin >= 0`.
    pub fn non_strict(&mut self, name: &str, margin: f64) {
        self.push(name, margin, margin >= 0.0);
    }

    /// Boolean condition without a meaningful numeric slack.
    pub fn flag(&mut self, name: &str, satisfied: bool) {
        self.push(name, if satisfied { 1.0 } else { 0.0 }, satisfied);
    }

    fn push(&mut self, name: &str, margin: f64, satisfied: bool) {
        // NaN margins (derived exponents undefined) count as failures.
        self.overall &= satisfied;
        self.checks.push(Check { name: name.to_string(), satisfied, margin });
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.satisfied)
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.overall &= other.overall;
        self.checks.extend(other.checks);
    }
}

/// Check every structural and growth condition on the exponents.
///
/// Strict inequalities pass with a positive margin; the integrability
/// conditions on `zeta_i` (stated with `<=`) and `m_i <= M_i` pass with a
/// nonnegative one.
pub fn validate(cfg: &ExponentConfig) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = cfg.dim as f64;

    r.non_strict("N>=3", n - 3.0);
    r.strict("p1>1", cfg.p1 - 1.0);
    r.strict("p1<N", n - cfg.p1);
    r.strict("p2>1", cfg.p2 - 1.0);
    r.strict("p2<N", n - cfg.p2);

    r.strict("alpha1>-1", cfg.alpha1 + 1.0);
    r.strict("alpha1<0", -cfg.alpha1);
    r.strict("beta2>-1", cfg.beta2 + 1.0);
    r.strict("beta2<0", -cfg.beta2);
    r.strict("alpha2>0", cfg.alpha2);
    r.strict("beta1>0", cfg.beta1);

    r.strict("m1>0", cfg.m1);
    r.strict("m2>0", cfg.m2);
    r.non_strict("m1<=M1", cfg.big_m1 - cfg.m1);
    r.non_strict("m2<=M2", cfg.big_m2 - cfg.m2);

    r.strict("alpha1+alpha2<p1-1", cfg.p1 - 1.0 - cfg.alpha1 - cfg.alpha2);
    r.strict("beta1+beta2<p2-1", cfg.p2 - 1.0 - cfg.beta1 - cfg.beta2);

    // p_i^* is only meaningful inside 1 < p_i < N; outside, the dependent
    // checks carry a NaN margin and fail.
    let p1s = if cfg.p1 > 1.0 && cfg.p1 < n { n * cfg.p1 / (n - cfg.p1) } else { f64::NAN };
    let p2s = if cfg.p2 > 1.0 && cfg.p2 < n { n * cfg.p2 / (n - cfg.p2) } else { f64::NAN };

    let beta1_cap = p2s / p1s * (cfg.p1 - 1.0).min(p1s - cfg.p1);
    let alpha2_cap = p1s / p2s * (cfg.p2 - 1.0).min(p2s - cfg.p2);
    r.strict("beta1<(p2*/p1*)min{p1-1,p1*-p1}", beta1_cap - cfg.beta1);
    r.strict("alpha2<(p1*/p2*)min{p2-1,p2*-p2}", alpha2_cap - cfg.alpha2);

    r.strict("zeta1>1", cfg.zeta1 - 1.0);
    r.strict("zeta2>1", cfg.zeta2 - 1.0);
    r.non_strict(
        "1/zeta1<=1-p1/p1*-beta1/p2*",
        1.0 - cfg.p1 / p1s - cfg.beta1 / p2s - 1.0 / cfg.zeta1,
    );
    r.non_strict(
        "1/zeta2<=1-p2/p2*-alpha2/p1*",
        1.0 - cfg.p2 / p2s - cfg.alpha2 / p1s - 1.0 / cfg.zeta2,
    );
    r
}
