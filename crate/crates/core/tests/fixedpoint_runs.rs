use std::sync::Arc;

use plapsys_core::bounds::{c4_uncached, compute_bounds, BoundsReport, MoserOptions};
use plapsys_core::fixedpoint::*;
use plapsys_core::weights::check_ha;
use plapsys_core::*;

fn setup(r_max: f64, nodes: usize, amp: f64) -> (ProblemContext, BoundsReport) {
    let cfg = ExponentConfig::standard();
    let grid = Arc::new(RadialGrid::build(3, r_max, nodes, Grading::Uniform).unwrap());
    let a = WeightSpec::gaussian(amp, 1.0);
    let n1 = check_ha(&a, &cfg, &grid, Side::U, None).unwrap().norms;
    let n2 = check_ha(&a, &cfg, &grid, Side::V, None).unwrap().norms;
    let b = compute_bounds(&cfg, &n1, &n2, &MoserOptions::default(), &c4_uncached).unwrap();
    (ProblemContext::with_bounds(cfg, &a, &a, grid, Boundary::FarField, &b).unwrap(), b)
}

#[test]
fn standard_run_is_certified() {
    let (ctx, _) = setup(8.0, 1024, 1.0);
    let run = continuation(&ctx, &ContinuationOptions::default()).unwrap();
    assert_eq!(run.stages.len(), 6);
    assert!(run.aborted_at.is_none());
    let cert = certify(&ctx, &run, &CertificationTolerances::default()).unwrap();
    assert!(cert.passed, "{:?}", cert.failures);
    assert_eq!(cert.d1p_decreasing, Some(true));
    // lower barrier does not depend on eps
    let e1 = ctx.envelopes(0.25).unwrap();
    let e2 = ctx.envelopes(0.01).unwrap();
    assert_eq!(e1.u_lo.values(), e2.u_lo.values());
    assert!(e2.u_hi_factor > e1.u_hi_factor);
}

#[test]
fn lower_and_upper_starts_agree() {
    let (ctx, _) = setup(8.0, 512, 1.0);
    let env = ctx.envelopes(0.25).unwrap();
    let o = PicardOptions::default();
    let lo = picard_solve(&ctx, &env, None, &o).unwrap();
    let hi = picard_solve(&ctx, &env, Some((env.u_hi.clone(), env.v_hi.clone())), &o).unwrap();
    assert!(lo.converged && hi.converged);
    assert!(lo.u.max_abs_diff(&hi.u).unwrap() < 1e-6);
    assert!(lo.v.max_abs_diff(&hi.v).unwrap() < 1e-6);
}

#[test]
fn forced_non_convergence_aborts_with_history() {
    let (ctx, _) = setup(8.0, 256, 1.0);
    let opts = ContinuationOptions { schedule: default_schedule(6), picard: PicardOptions { theta: 1.0, tol: 1e-30, max_iter: 5 } };
    let run = continuation(&ctx, &opts).unwrap();
    assert_eq!(run.aborted_at, Some(0));
    assert_eq!(run.stages.len(), 1);
    assert_eq!(run.stages[0].iterations, 5);
    assert!(!certify(&ctx, &run, &CertificationTolerances::default()).unwrap().passed);
}

#[test]
fn amplified_run_satisfies_truncated_inequalities() {
    let (ctx, b) = setup(8.0, 1024, 6.0);
    let run = continuation(&ctx, &ContinuationOptions::default()).unwrap();
    assert!(run.aborted_at.is_none());
    let s = &run.state;
    assert!(s.u.max() > 1.0 && s.v.max() > 1.0);
    let t = truncated_inequality_check(&s.u, &s.v, &ctx.cfg, &ctx.a1, &ctx.a2, &ctx.tests, 1e-6).unwrap();
    assert!(t.passed, "{}", t.worst_excess);
    assert!(t.u_nodes > 0);
    let cert = certify(&ctx, &run, &CertificationTolerances::default()).unwrap();
    assert!(cert.truncation_inactive && cert.residual_passed);
    // the literal max{1, C5} does not cover this solution; the rho-based bound does
    assert!(s.u.max() > b.r_inf);
    assert!(s.u.max() < b.r_inf_from_rho);
}
