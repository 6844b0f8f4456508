use std::sync::Arc;

use proptest::prelude::*;

use plapsys_core::bounds::{compute_bounds, kappa_sequence, lpstar_apriori, simon_check, c4_uncached, MoserOptions, SobolevConstants};
use plapsys_core::plap::{weak_residual, TestFunctionSet};
use plapsys_core::weights::interpolation_check;
use plapsys_core::*;

fn grid(n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::build(3, 4.0, n, Grading::Power { exponent: 1.5 }).unwrap())
}

fn rhs_strategy() -> impl Strategy<Value = Vec<f64>> {
    // coefficients of shifted gaussians
    prop::collection::vec(0.0..5.0f64, 5)
}

fn field(g: &Arc<RadialGrid>, c: &[f64]) -> RadialField {
    RadialField::from_fn(g.clone(), |r| c.iter().enumerate().map(|(i, a)| a * (-(r - i as f64).powi(2)).exp()).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_is_homogeneous(c in rhs_strategy(), lambda in 0.01..50.0f64, p in 1.2..2.9f64) {
        let g = grid(257);
        let h = field(&g, &c);
        let u = solve(&PLapProblem::new(p, h.clone(), Boundary::FarField)).unwrap();
        let ul = solve(&PLapProblem::new(p, h.scale(lambda), Boundary::FarField)).unwrap();
        let k = lambda.powf(1.0 / (p - 1.0));
        for (a, b) in u.values().iter().zip(ul.values()) {
            prop_assert!((k * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn solve_is_monotone(c in rhs_strategy(), d in rhs_strategy(), p in 1.2..2.9f64) {
        let g = grid(257);
        let h = field(&g, &c);
        let h2 = h.zip_with(&field(&g, &d), |a, b| a + b).unwrap();
        let u = solve(&PLapProblem::new(p, h, Boundary::Dirichlet)).unwrap();
        let v = solve(&PLapProblem::new(p, h2, Boundary::Dirichlet)).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            prop_assert!(*a <= *b + 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn phi_round_trip(s in -1e3..1e3f64, p in 1.05..6.0f64) {
        let back = phi_p_inv(phi_p(s, p), p);
        prop_assert!((back - s).abs() <= 1e-12 * (1.0 + s.abs()));
    }

    #[test]
    fn discrete_weak_form_holds(c in rhs_strategy(), p in 1.3..2.9f64) {
        let g = grid(200);
        let h = field(&g, &c);
        let u = solve(&PLapProblem::new(p, h.clone(), Boundary::FarField)).unwrap();
        let tests = TestFunctionSet::polynomial_bumps(&g, 20);
        let res = weak_residual(&u, &h, p, &tests).unwrap();
        let scale = h.max().max(1.0) * g.sphere_area() * 64.0;
        prop_assert!(res.iter().all(|r| *r <= 1e-12 * scale), "{:?}", res);
    }

    #[test]
    fn simon_holds(dim in 1usize..6, p in prop::sample::select(vec![1.5, 2.0, 3.0]),
                   a in prop::collection::vec(-10.0..10.0f64, 5), b in prop::collection::vec(-10.0..10.0f64, 5)) {
        let c = simon_check(&a[..dim], &b[..dim], p).unwrap();
        prop_assert!(c.lhs >= 0.0);
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn interpolation_for_gaussian(amp in 0.1..5.0f64, lambda in 0.3..3.0f64, q in 1.01..3.0f64, extra in 0.01..3.0f64) {
        let g = grid(400);
        let w = WeightSpec::gaussian(amp, lambda).sample(&g);
        let c = interpolation_check(&w, q + extra, q, 1e-8).unwrap();
        prop_assert!(c.holds);
    }

    #[test]
    fn kappa_grows_and_satisfies_condition(xi in 1.51..3.99f64, kappa0 in 0.0..3.0f64) {
        let s = kappa_sequence(3, 2.0, 4.0, xi, kappa0, 1e-9, 20).unwrap();
        for w in s.kappa.windows(2) {
            prop_assert!(w[1] * 2.0 + 1.0 > w[0] + 1.0);
            prop_assert!(w[1] > w[0]);
        }
        prop_assert!(s.cond_k_margin > 0.0);
    }

    #[test]
    fn bounds_monotone_in_weight_norms(f in 1.0..4.0f64, which in 0usize..4) {
        let cfg = ExponentConfig::standard();
        let base = WeightNorms::unit();
        let mut big = base;
        match which {
            0 => big.delta *= f,
            1 => big.gamma *= f,
            2 => big.xi *= f,
            _ => big.zeta *= f,
        }
        let s = SobolevConstants::talenti(&cfg).unwrap();
        let r0 = lpstar_apriori(&cfg, &base, &base, &s).unwrap().rho;
        let r1 = lpstar_apriori(&cfg, &big, &base, &s).unwrap().rho;
        prop_assert!(r1 >= r0);
        let o = MoserOptions::default();
        let b0 = compute_bounds(&cfg, &base, &base, &o, &c4_uncached).unwrap();
        let b1 = compute_bounds(&cfg, &big, &base, &o, &c4_uncached).unwrap();
        prop_assert!(b1.r_inf >= b0.r_inf && b0.r_inf >= 1.0);
        prop_assert!(b1.r_inf_from_rho >= b0.r_inf_from_rho);
    }
}
