//! Radial p-Laplacian with a frozen right-hand side.
//!
//! For a radial `h >= 0` the equation `-Delta_p u = h` integrates twice:
//! the flux through the sphere of radius `s` equals the load inside it, so
//!
//! ```text
//! u(r) = u(R_max) + int_r^{R_max} phi_p^{-1}( s^{1-N} int_0^s t^{N-1} h(t) dt ) ds.
//! ```
//!
//! The discrete solver inverts the piecewise-linear Galerkin form of the
//! equation exactly: node loads are `h_j` times the exact hat mass, cell
//! fluxes are prefix sums of the loads, and each cell slope is recovered
//! from its flux through `phi_p^{-1}`. The load inside the first shell is
//! divided by that shell's exact measure, never by `s^{N-1}` at `s = 0`.
//! The result is nonnegative, nonincreasing, monotone in `h` and positively
//! homogeneous of degree `1/(p-1)`, and it satisfies the discrete weak form
//! checked by [`weak_residual`] up to round-off.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::math::powf;
use crate::weights::WeightSpec;

/// `|s|^{p-2} s`
#[inline]
pub fn phi_p(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        powf(s.abs(), p - 1.0).copysign(s)
    }
}

/// `|t|^{1/(p-1)} sign(t)`, the inverse of [`phi_p`].
#[inline]
pub fn phi_p_inv(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        powf(t.abs(), 1.0 / (p - 1.0)).copysign(t)
    }
}

/// Condition imposed at `r = R_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Boundary {
    /// `u(R_max) = 0`: the Dirichlet problem on the ball.
    #[default]
    Dirichlet,
    /// Exact exterior solution for a right-hand side vanishing outside the
    /// ball: `u(R_max) = int_{R_max}^inf phi_p^{-1}(F / s^{N-1}) ds` with `F`
    /// the total load. Models the whole-space problem; needs `p < N`.
    FarField,
}

/// `-Delta_p u = rhs` on the grid of `rhs`.
#[derive(Debug, Clone)]
pub struct PLapProblem {
    pub p: f64,
    pub rhs: RadialField,
    pub boundary: Boundary,
}

impl PLapProblem {
    pub fn new(p: f64, rhs: RadialField, boundary: Boundary) -> Self {
        Self { p, rhs, boundary }
    }
}

/// Solve the frozen right-hand-side problem.
pub fn solve(problem: &PLapProblem) -> Result<RadialField> {
    let grid = problem.rhs.grid();
    let p = problem.p;
    let n = grid.dim();
    if !(p > 1.0) || !p.is_finite() || (problem.boundary == Boundary::FarField && !(p < n as f64)) {
        return Err(Error::ExponentRange { p, dim: n });
    }
    let h = problem.rhs.values();
    if let Some(node) = h.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeRhs { node, value: h[node] });
    }

    let r = grid.nodes();
    let mu = grid.cell_measure();
    let mass = grid.hat_mass();
    let last = r.len() - 1;
    let gamma = 1.0 / (p - 1.0);

    // slope magnitude on each cell
    let mut slope = Vec::with_capacity(last);
    let mut load = 0.0;
    for k in 0..last {
        load += h[k] * mass[k];
        let dr = r[k + 1] - r[k];
        slope.push(phi_p_inv(load * dr / mu[k], p));
    }

    let mut u = alloc::vec![0.0; r.len()];
    u[last] = match problem.boundary {
        Boundary::Dirichlet => 0.0,
        Boundary::FarField => {
            let total = load + h[last] * mass[last];
            far_field_value(total / grid.sphere_area(), r[last], n, gamma)
        }
    };
    for k in (0..last).rev() {
        u[k] = u[k + 1] + (r[k + 1] - r[k]) * slope[k];
    }
    RadialField::new(grid.clone(), u)
}

/// `int_R^inf (F s^{1-N})^gamma ds = F^gamma R^{1-(N-1)gamma} / ((N-1)gamma - 1)`.
fn far_field_value(flux: f64, r_max: f64, dim: usize, gamma: f64) -> f64 {
    let e = (dim as f64 - 1.0) * gamma;
    powf(flux, gamma) * powf(r_max, 1.0 - e) / (e - 1.0)
}

/// Torsion function of a weight: the solution of `-Delta_p w = a`.
pub fn torsion(spec: &WeightSpec, p: f64, grid: &Arc<RadialGrid>, boundary: Boundary) -> Result<RadialField> {
    spec.validate()?;
    let a = spec.sample(grid);
    let w = solve(&PLapProblem::new(p, a, boundary))?;
    debug_assert!(w.values().iter().all(|v| *v >= 0.0 && v.is_finite()));
    Ok(w)
}

/// Nonnegative test functions vanishing at `R_max`.
#[derive(Debug, Clone)]
pub struct TestFunctionSet {
    pub functions: Vec<RadialField>,
    pub description: String,
}

impl TestFunctionSet {
    /// `count` polynomial bumps: even members are `(1 - (r/rho)^2)_+^k`
    /// centred at the origin with growing support, odd members are
    /// `((r-a)(b-r))_+^2` on shells spread across the domain. Each is scaled
    /// to a maximum of one.
    pub fn polynomial_bumps(grid: &Arc<RadialGrid>, count: usize) -> Self {
        let r_max = grid.r_max();
        let half = count.div_ceil(2).max(1) as f64;
        let mut functions = Vec::with_capacity(count);
        for j in 0..count {
            let f = if j % 2 == 0 {
                let rho = r_max * ((j / 2) as f64 + 1.0) / half;
                let k = 2.0 + (j / 2 % 3) as f64;
                RadialField::from_fn(grid.clone(), move |x| {
                    let s = x / rho;
                    if s >= 1.0 {
                        0.0
                    } else {
                        powf(1.0 - s * s, k)
                    }
                })
            } else {
                let c = r_max * ((j / 2) as f64 + 0.5) / half;
                let w = (r_max / half).min(c).min(r_max - c);
                let (a, b) = (c - w, c + w);
                let top = w * w * w * w;
                RadialField::from_fn(grid.clone(), move |x| {
                    if x <= a || x >= b {
                        0.0
                    } else {
                        let t = (x - a) * (b - x);
                        t * t / top
                    }
                })
            };
            functions.push(f);
        }
        Self { functions, description: format!("polynomial_bumps({count})") }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// `int |u'|^{p-2} u' phi'` over the cells of the grid.
pub fn stiffness(u: &RadialField, test: &RadialField, p: f64) -> Result<f64> {
    u.check_same_grid(test)?;
    let mu = u.grid().cell_measure();
    let du = u.cell_gradient();
    let dphi = test.cell_gradient();
    Ok(du.iter().zip(&dphi).zip(mu).map(|((a, b), m)| m * phi_p(*a, p) * b).sum())
}

/// `int rhs phi` with the nodal (hat-mass) quadrature used by [`solve`].
pub fn load(rhs: &RadialField, test: &RadialField) -> Result<f64> {
    rhs.check_same_grid(test)?;
    let mass = rhs.grid().hat_mass();
    Ok(rhs.values().iter().zip(test.values()).zip(mass).map(|((h, f), m)| h * f * m).sum())
}

/// `|int |u'|^{p-2}u' phi' - int rhs phi|` for each test function.
pub fn weak_residual(u: &RadialField, rhs: &RadialField, p: f64, tests: &TestFunctionSet) -> Result<Vec<f64>> {
    u.check_same_grid(rhs)?;
    tests
        .functions
        .iter()
        .map(|phi| Ok((stiffness(u, phi, p)? - load(rhs, phi)?).abs()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grading;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::build(3, r_max, n, Grading::Uniform).unwrap())
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_p(-2.0, 3.0), -4.0);
        assert_eq!(phi_p_inv(-4.0, 3.0), -2.0);
        assert_eq!(phi_p(0.7, 2.0), 0.7);
        assert_eq!(phi_p_inv(-0.3, 2.0), -0.3);
        assert_eq!(phi_p(0.0, 1.5), 0.0);
        assert_eq!(phi_p_inv(0.0, 1.5), 0.0);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = grid(1.0, 64);
        for bc in [Boundary::Dirichlet, Boundary::FarField] {
            let u = solve(&PLapProblem::new(2.0, RadialField::zeros(g.clone()), bc)).unwrap();
            assert!(u.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rejects_negative_rhs_and_bad_p() {
        let g = grid(1.0, 64);
        let mut h = RadialField::constant(g.clone(), 1.0).into_values();
        h[5] = -1e-3;
        let rhs = RadialField::new(g.clone(), h).unwrap();
        assert!(matches!(
            solve(&PLapProblem::new(2.0, rhs, Boundary::Dirichlet)),
            Err(Error::NegativeRhs { node: 5, .. })
        ));
        let one = RadialField::constant(g, 1.0);
        assert!(solve(&PLapProblem::new(3.0, one.clone(), Boundary::FarField)).is_err());
        assert!(solve(&PLapProblem::new(3.0, one.clone(), Boundary::Dirichlet)).is_ok());
        assert!(solve(&PLapProblem::new(1.0, one, Boundary::Dirichlet)).is_err());
    }

    #[test]
    fn constant_rhs_p2_matches_closed_form() {
        let g = grid(1.0, 2048);
        let u = solve(&PLapProblem::new(2.0, RadialField::constant(g.clone(), 1.0), Boundary::Dirichlet)).unwrap();
        assert_eq!(u.values()[g.len() - 1], 0.0);
        for (r, v) in g.nodes().iter().zip(u.values()) {
            assert!((v - (1.0 - r * r) / 6.0).abs() < 1e-6);
        }
    }

    #[test]
    fn solution_is_nonincreasing_and_positive_where_loaded() {
        let g = grid(4.0, 401);
        let a = WeightSpec::Bump { amplitude: 1.0, radius: 1.0, power: 2.0 };
        let w = torsion(&a, 2.0, &g, Boundary::Dirichlet).unwrap();
        let v = w.values();
        for k in 0..v.len() - 1 {
            assert!(v[k] > v[k + 1], "not strictly decreasing at {k}");
        }
        assert_eq!(v[v.len() - 1], 0.0);
    }

    #[test]
    fn far_field_matches_whole_space_torsion() {
        // -Delta w = e^{-r^2} in R^3 has w(0) = int_0^inf s e^{-s^2} ds = 1/2
        let g = grid(8.0, 4096);
        let w = torsion(&WeightSpec::gaussian(1.0, 1.0), 2.0, &g, Boundary::FarField).unwrap();
        assert!((w.values()[0] - 0.5).abs() < 1e-5, "{}", w.values()[0]);
        assert!(w.min() > 0.0);
    }

    #[test]
    fn discrete_solution_satisfies_weak_form() {
        let g = grid(3.0, 512);
        let rhs = WeightSpec::gaussian(2.0, 1.5).sample(&g);
        let tests = TestFunctionSet::polynomial_bumps(&g, 20);
        for (p, bc) in [(1.5, Boundary::Dirichlet), (2.5, Boundary::FarField)] {
            let u = solve(&PLapProblem::new(p, rhs.clone(), bc)).unwrap();
            let res = weak_residual(&u, &rhs, p, &tests).unwrap();
            assert!(res.iter().all(|&x| x < 1e-11), "{res:?}");
        }
    }

    #[test]
    fn bump_tests_vanish_at_boundary_and_are_nonnegative() {
        let g = grid(8.0, 1024);
        let t = TestFunctionSet::polynomial_bumps(&g, 20);
        assert_eq!(t.len(), 20);
        for f in &t.functions {
            assert_eq!(f.values()[g.len() - 1], 0.0);
            assert!(f.min() >= 0.0);
            assert!(f.max() > 0.5);
        }
    }

    #[test]
    fn zero_pair_has_zero_residual() {
        let g = grid(1.0, 128);
        let z = RadialField::zeros(g.clone());
        let t = TestFunctionSet::polynomial_bumps(&g, 20);
        assert!(weak_residual(&z, &z, 2.0, &t).unwrap().iter().all(|&r| r == 0.0));
    }
}
