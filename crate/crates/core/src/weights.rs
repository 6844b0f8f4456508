//! Radial coefficient families `a_i`, their Lebesgue norms and the
//! integrability checks the bounds depend on.

use alloc::format;
use alloc::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::hypotheses::{derive_exponents, ExponentConfig, Side, ValidationReport};
use crate::math::{exp, gamma, lgamma, powf, unit_sphere_area};

/// Closed-form radial weight.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum WeightSpec {
    /// `A exp(-lambda r^2)`
    Gaussian { amplitude: f64, lambda: f64 },
    /// `A (1 - (r/radius)^2)_+^power`
    Bump { amplitude: f64, radius: f64, power: f64 },
    /// `A (1 + r)^{-sigma}`
    PowerDecay { amplitude: f64, sigma: f64 },
}

impl WeightSpec {
    pub fn gaussian(amplitude: f64, lambda: f64) -> Self {
        Self::Gaussian { amplitude, lambda }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Self::Gaussian { amplitude, .. }
            | Self::Bump { amplitude, .. }
            | Self::PowerDecay { amplitude, .. } => amplitude,
        }
    }

    /// Same family with the amplitude replaced.
    pub fn with_amplitude(self, a: f64) -> Self {
        match self {
            Self::Gaussian { lambda, .. } => Self::Gaussian { amplitude: a, lambda },
            Self::Bump { radius, power, .. } => Self::Bump { amplitude: a, radius, power },
            Self::PowerDecay { sigma, .. } => Self::PowerDecay { amplitude: a, sigma },
        }
    }

    /// Parameter sanity. Integrability of the power-decay tail is a property
    /// of the pair (weight, exponent) and is reported by [`check_ha`] instead.
    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, msg: &str| if c { Ok(()) } else { Err(Error::Weight(msg.into())) };
        match *self {
            Self::Gaussian { amplitude, lambda } => {
                ok(amplitude > 0.0 && amplitude.is_finite(), "amplitude must be positive")?;
                ok(lambda > 0.0 && lambda.is_finite(), "gaussian lambda must be positive")
            }
            Self::Bump { amplitude, radius, power } => {
                ok(amplitude > 0.0 && amplitude.is_finite(), "amplitude must be positive")?;
                ok(radius > 0.0 && radius.is_finite(), "bump radius must be positive")?;
                ok(power >= 1.0 && power.is_finite(), "bump power must be >= 1")
            }
            Self::PowerDecay { amplitude, sigma } => {
                ok(amplitude > 0.0 && amplitude.is_finite(), "amplitude must be positive")?;
                ok(sigma > 0.0 && sigma.is_finite(), "decay exponent must be positive")
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Self::Gaussian { amplitude, lambda } => amplitude * exp(-lambda * r * r),
            Self::Bump { amplitude, radius, power } => {
                let s = r / radius;
                if s >= 1.0 {
                    0.0
                } else {
                    amplitude * powf(1.0 - s * s, power)
                }
            }
            Self::PowerDecay { amplitude, sigma } => amplitude * powf(1.0 + r, -sigma),
        }
    }

    /// Whole-space `int_{R^N} a^q dx`, or `None` when it diverges.
    pub fn analytic_norm_pow(&self, q: f64, dim: usize) -> Option<f64> {
        let n = dim as f64;
        let pi = core::f64::consts::PI;
        match *self {
            Self::Gaussian { amplitude, lambda } => {
                Some(powf(amplitude, q) * powf(pi / (q * lambda), 0.5 * n))
            }
            Self::Bump { amplitude, radius, power } => {
                let kq = power * q;
                Some(
                    powf(amplitude, q)
                        * powf(radius, n)
                        * powf(pi, 0.5 * n)
                        * exp(lgamma(kq + 1.0) - lgamma(kq + 1.0 + 0.5 * n)),
                )
            }
            Self::PowerDecay { amplitude, sigma } => {
                let s = sigma * q;
                if s <= n {
                    return None;
                }
                // int_0^inf r^{N-1} (1+r)^{-s} dr = B(N, s - N)
                let beta = gamma(n) * exp(lgamma(s - n) - lgamma(s));
                Some(unit_sphere_area(dim) * powf(amplitude, q) * beta)
            }
        }
    }

    /// Whole-space `L^q` norm, `None` when infinite.
    pub fn analytic_norm(&self, q: f64, dim: usize) -> Option<f64> {
        self.analytic_norm_pow(q, dim).map(|v| powf(v, 1.0 / q))
    }

    /// Upper bound on `int_{|x| > r_max} a^q dx`, when one is available in
    /// closed form.
    pub fn tail_bound(&self, q: f64, dim: usize, r_max: f64) -> Option<f64> {
        let omega = unit_sphere_area(dim);
        match *self {
            Self::Gaussian { amplitude, lambda } => {
                // int_R^inf r^m e^{-c r^2} dr <= R^{m-1} e^{-c R^2} / (2c (1 - (m-1)/(2cR^2)))
                let c = q * lambda;
                let m = dim as f64 - 1.0;
                let denom = 1.0 - (m - 1.0) / (2.0 * c * r_max * r_max);
                if denom <= 0.0 {
                    return None;
                }
                let t = powf(r_max, m - 1.0) * exp(-c * r_max * r_max) / (2.0 * c * denom);
                Some(omega * powf(amplitude, q) * t)
            }
            Self::Bump { amplitude, radius, power } => {
                if radius <= r_max {
                    Some(0.0)
                } else {
                    // integrand is bounded by its value at r_max
                    let n = dim as f64;
                    let top = powf(amplitude * powf(1.0 - (r_max / radius) * (r_max / radius), power), q);
                    Some(omega / n * (powf(radius, n) - powf(r_max, n)) * top)
                }
            }
            Self::PowerDecay { .. } => None,
        }
    }

    pub fn sample(&self, grid: &Arc<RadialGrid>) -> RadialField {
        RadialField::from_fn(grid.clone(), |r| self.eval(r))
    }
}

/// Weight norms consumed by the a priori bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WeightNorms {
    pub l1: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub xi: f64,
    pub p_star_conj: f64,
}

impl WeightNorms {
    /// All norms equal to one; handy for exercising the bound formulas.
    pub fn unit() -> Self {
        Self { l1: 1.0, zeta: 1.0, gamma: 1.0, delta: 1.0, xi: 1.0, p_star_conj: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WeightReport {
    pub report: ValidationReport,
    /// Norms on the truncated domain by quadrature; these feed the bounds.
    pub norms: WeightNorms,
    /// Whole-space closed-form norms, where finite.
    pub analytic: Option<WeightNorms>,
    /// Largest relative gap between quadrature and whole-space norms.
    pub norm_gap: f64,
    /// Upper bound on the `L^1` mass outside `r_max`.
    pub tail_error_bar: Option<f64>,
    /// Nodes where the weight vanishes (outside a compact support).
    pub zero_weight_nodes: usize,
}

/// Integrability and positivity of a weight against the exponents of `side`.
///
/// `xi` defaults to the midpoint of its admissible interval.
pub fn check_ha(
    spec: &WeightSpec,
    cfg: &ExponentConfig,
    grid: &Arc<RadialGrid>,
    side: Side,
    xi: Option<f64>,
) -> Result<WeightReport> {
    spec.validate()?;
    let d = derive_exponents(cfg)?;
    let dim = cfg.dim;
    let a = spec.sample(grid);
    if let Some(node) = a.values().iter().position(|&v| v < 0.0) {
        return Err(Error::Weight(format!("negative sample at node {node}")));
    }
    let zero_weight_nodes = a.values().iter().filter(|&&v| v == 0.0).count();

    let zeta = cfg.zeta(side);
    let xi = xi.unwrap_or_else(|| d.xi_range(side).midpoint());
    let exps = [1.0, zeta, d.gamma(side), d.delta(side), xi, d.p_star_conj(side)];

    let mut numeric = [0.0; 6];
    for (out, &q) in numeric.iter_mut().zip(&exps) {
        *out = a.lq_norm(q)?;
    }
    let analytic: Option<[f64; 6]> = {
        let mut vals = [0.0; 6];
        let mut all = true;
        for (out, &q) in vals.iter_mut().zip(&exps) {
            match spec.analytic_norm(q, dim) {
                Some(v) => *out = v,
                None => all = false,
            }
        }
        all.then_some(vals)
    };
    let norm_gap = analytic
        .map(|an| numeric.iter().zip(&an).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs() / y)))
        .unwrap_or(f64::NAN);

    let label = match side {
        Side::U => "a1",
        Side::V => "a2",
    };
    let mut report = ValidationReport::new();
    report.flag(&format!("{label}>0 at origin"), a.values()[0] > 0.0);
    report.flag(&format!("{label} in L^1"), spec.analytic_norm_pow(1.0, dim).is_some());
    report.flag(&format!("{label} in L^zeta"), spec.analytic_norm_pow(zeta, dim).is_some());
    report.flag(&format!("{label} norms finite on grid"), numeric.iter().all(|v| v.is_finite()));

    let pack = |v: [f64; 6]| WeightNorms {
        l1: v[0],
        zeta: v[1],
        gamma: v[2],
        delta: v[3],
        xi: v[4],
        p_star_conj: v[5],
    };
    Ok(WeightReport {
        report,
        norms: pack(numeric),
        analytic: analytic.map(pack),
        norm_gap,
        tail_error_bar: spec.tail_bound(1.0, dim, grid.r_max()),
        zero_weight_nodes,
    })
}

/// Both sides of `||w||_q^q <= ||w||_1 + ||w||_p^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn interpolation_check(field: &RadialField, p: f64, q: f64, tol: f64) -> Result<InterpolationCheck> {
    if !(q > 1.0 && q < p) {
        return Err(Error::InvalidArgument(format!("need 1 < q < p, got q = {q}, p = {p}")));
    }
    let lhs = field.lq_norm_pow(q);
    let rhs = field.lq_norm_pow(1.0) + field.lq_norm_pow(p);
    Ok(InterpolationCheck { lhs, rhs, holds: lhs <= rhs + tol })
}
