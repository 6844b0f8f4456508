//! Acceptance suite. Run with
//! `cargo test -p plapsys --release --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plapsys::commands::{run_solve, SolveOutcome};
use plapsys::RunConfig;
use plapsys_core::bounds::{compute_bounds, kappa_sequence, simon_check, MoserOptions};
use plapsys_core::fixedpoint::truncated_inequality_check;
use plapsys_core::weights::{check_ha, interpolation_check};
use plapsys_core::{
    phi_p, phi_p_inv, solve, validate, Boundary, ExponentConfig, Grading, PLapProblem, RadialField, RadialGrid, Side,
    WeightSpec,
};

const STD: &str = include_str!("../../../configs/std.toml");

// Tolerances
const MANUFACTURED_ERR: f64 = 1e-5;
const MANUFACTURED_RATIO: f64 = 3.5;
const MANUFACTURED_TIME: Duration = Duration::from_secs(1);
const OPERATOR_TOL: f64 = 1e-12;
const SIMON_TOL: f64 = 1e-12;
const INTERP_TOL: f64 = 1e-8;
const KAPPA_RATIO_REL: f64 = 0.01;
const KAPPA_TAIL: f64 = 1e-8;
const PICARD_MAX_ITER: usize = 200;
const PICARD_DIST: f64 = 1e-8;
const BRACKET_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-6;
const E2E_TIME: Duration = Duration::from_secs(60);
const TRUNCATED_TOL: f64 = 1e-6;
const RMAX_REL: f64 = 0.01;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn std_config() -> RunConfig {
    RunConfig::from_toml_str(STD).unwrap()
}

// 1. manufactured solutions

fn exact(p: f64, dim: usize, r: f64) -> f64 {
    let g = 1.0 / (p - 1.0);
    (1.0 / dim as f64).powf(g) * (1.0 - r.powf(g + 1.0)) / (g + 1.0)
}

fn manufactured_error(p: f64, dim: usize, nodes: usize) -> Result<(f64, Duration), String> {
    let t = Instant::now();
    let grid = Arc::new(RadialGrid::build(dim, 1.0, nodes, Grading::Power { exponent: 2.0 }).map_err(|e| e.to_string())?);
    let rhs = RadialField::constant(grid.clone(), 1.0);
    let u = solve(&PLapProblem::new(p, rhs, Boundary::Dirichlet)).map_err(|e| e.to_string())?;
    let err = grid.nodes().iter().zip(u.values()).map(|(r, v)| (v - exact(p, dim, *r)).abs()).fold(0.0, f64::max);
    Ok((err, t.elapsed()))
}

fn manufactured() -> Outcome {
    let mut detail = Vec::new();
    for (p, dim) in [(1.5, 3), (2.0, 3), (3.0, 3)] {
        let t = Instant::now();
        let (e1, _) = manufactured_error(p, dim, 1024)?;
        let (e2, _) = manufactured_error(p, dim, 2048)?;
        let (e3, t3) = manufactured_error(p, dim, 4096)?;
        let total = t.elapsed();
        let (r1, r2) = (e1 / e2, e2 / e3);
        ensure(e3 <= MANUFACTURED_ERR, || format!("p={p}: error {e3:.3e}"))?;
        ensure(r1 >= MANUFACTURED_RATIO && r2 >= MANUFACTURED_RATIO, || format!("p={p}: ratios {r1:.2} {r2:.2}"))?;
        ensure(t3 < MANUFACTURED_TIME, || format!("p={p}: {t3:?}"))?;
        detail.push(format!("p={p} err={e3:.2e} ratios={r1:.2},{r2:.2} time={total:.1?}"));
    }
    Ok(detail.join("; "))
}

// 2. operator properties

fn random_rhs(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>) -> RadialField {
    let c: Vec<(f64, f64, f64)> =
        (0..4).map(|_| (rng.gen_range(0.0..5.0), rng.gen_range(0.0..3.0), rng.gen_range(0.3..3.0))).collect();
    RadialField::from_fn(grid.clone(), |r| c.iter().map(|(a, m, l)| a * (-l * (r - m) * (r - m)).exp()).sum())
}

fn operator_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = Arc::new(RadialGrid::build(3, 6.0, 512, Grading::Uniform).unwrap());
    let mut worst_h: f64 = 0.0;
    for _ in 0..100 {
        let h = random_rhs(&mut rng, &grid);
        let lambda = rng.gen_range(0.01..50.0);
        let p = rng.gen_range(1.2..2.9);
        let u = solve(&PLapProblem::new(p, h.clone(), Boundary::FarField)).map_err(|e| e.to_string())?;
        let ul = solve(&PLapProblem::new(p, h.scale(lambda), Boundary::FarField)).map_err(|e| e.to_string())?;
        let k = lambda.powf(1.0 / (p - 1.0));
        for (a, b) in u.values().iter().zip(ul.values()) {
            worst_h = worst_h.max((k * a - b).abs() / (1.0 + b.abs()));
        }
    }
    ensure(worst_h <= OPERATOR_TOL, || format!("homogeneity defect {worst_h:.2e}"))?;

    let mut worst_m: f64 = 0.0;
    for _ in 0..100 {
        let h = random_rhs(&mut rng, &grid);
        let h2 = h.zip_with(&random_rhs(&mut rng, &grid), |a, b| a + b).unwrap();
        let p = rng.gen_range(1.2..2.9);
        let u = solve(&PLapProblem::new(p, h, Boundary::Dirichlet)).map_err(|e| e.to_string())?;
        let v = solve(&PLapProblem::new(p, h2, Boundary::Dirichlet)).map_err(|e| e.to_string())?;
        for (a, b) in u.values().iter().zip(v.values()) {
            worst_m = worst_m.max((a - b) / (1.0 + b.abs()));
        }
    }
    ensure(worst_m <= OPERATOR_TOL, || format!("comparison defect {worst_m:.2e}"))?;

    let mut worst_phi: f64 = 0.0;
    for _ in 0..10_000 {
        let s = rng.gen_range(-1e3..1e3);
        let p = rng.gen_range(1.05..6.0);
        worst_phi = worst_phi.max((phi_p_inv(phi_p(s, p), p) - s).abs() / (1.0 + s.abs()));
    }
    ensure(worst_phi <= OPERATOR_TOL, || format!("phi round trip {worst_phi:.2e}"))?;
    Ok(format!("homogeneity {worst_h:.1e}, comparison {worst_m:.1e}, phi {worst_phi:.1e}"))
}

// 3. Simon inequalities

fn simon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ps = [1.5, 2.0, 3.0];
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100_000 {
        let dim = 1 + i % 5;
        let p = ps[(i / 5) % 3];
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let a: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let c = simon_check(&a, &b, p).map_err(|e| e.to_string())?;
        let excess = (c.rhs - c.lhs) / (1.0 + c.lhs.abs());
        worst = worst.max(excess);
        if excess > SIMON_TOL {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations, worst {worst:.2e}"))?;
    Ok(format!("100000 pairs, worst relative excess {worst:.1e}"))
}

// 4. interpolation

fn interpolation() -> Outcome {
    let grid = Arc::new(RadialGrid::build(3, 12.0, 4096, Grading::Uniform).unwrap());
    let families = [
        WeightSpec::gaussian(2.0, 0.7),
        WeightSpec::Bump { amplitude: 3.0, radius: 2.0, power: 2.0 },
        WeightSpec::PowerDecay { amplitude: 1.5, sigma: 4.0 },
    ];
    let lattice = [(1.1, 1.5), (1.2, 2.0), (1.5, 2.0), (1.5, 3.0), (2.0, 3.0), (2.0, 4.0), (2.5, 5.0), (3.0, 6.0), (4.0, 5.0), (5.5, 6.0)];
    let mut checks = 0;
    for w in &families {
        let field = w.sample(&grid);
        for (q, p) in lattice {
            let c = interpolation_check(&field, p, q, INTERP_TOL).map_err(|e| e.to_string())?;
            ensure(c.holds, || format!("{w:?} q={q} p={p}: {} > {}", c.lhs, c.rhs))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} family/lattice points"))
}

// 5. hypothesis checker against an independent oracle

fn oracle(c: &ExponentConfig) -> usize {
    let n = c.dim as f64;
    let s1 = n * c.p1 / (n - c.p1);
    let s2 = n * c.p2 / (n - c.p2);
    let conditions = [
        c.dim >= 3,
        1.0 < c.p1 && c.p1 < n,
        1.0 < c.p2 && c.p2 < n,
        -1.0 < c.alpha1 && c.alpha1 < 0.0,
        -1.0 < c.beta2 && c.beta2 < 0.0,
        c.alpha2 > 0.0,
        c.beta1 > 0.0,
        0.0 < c.m1 && c.m1 <= c.big_m1,
        0.0 < c.m2 && c.m2 <= c.big_m2,
        c.alpha1 + c.alpha2 < c.p1 - 1.0,
        c.beta1 + c.beta2 < c.p2 - 1.0,
        c.beta1 < s2 / s1 * f64::min(c.p1 - 1.0, s1 - c.p1),
        c.alpha2 < s1 / s2 * f64::min(c.p2 - 1.0, s2 - c.p2),
        c.zeta1 > 1.0 && c.zeta2 > 1.0,
        1.0 / c.zeta1 <= 1.0 - c.p1 / s1 - c.beta1 / s2,
        1.0 / c.zeta2 <= 1.0 - c.p2 / s2 - c.alpha2 / s1,
    ];
    conditions.iter().filter(|ok| !**ok).count()
}

fn admissible_config(rng: &mut ChaCha8Rng) -> ExponentConfig {
    loop {
        let dim = rng.gen_range(3..=5);
        let n = dim as f64;
        let p1 = rng.gen_range(1.3..n - 0.3);
        let p2 = rng.gen_range(1.3..n - 0.3);
        let (s1, s2) = (n * p1 / (n - p1), n * p2 / (n - p2));
        let alpha1 = rng.gen_range(-0.9..-0.1);
        let beta2 = rng.gen_range(-0.9..-0.1);
        let alpha2 = rng.gen_range(0.1..0.9) * f64::min(s1 / s2 * f64::min(p2 - 1.0, s2 - p2), p1 - 1.0 - alpha1);
        let beta1 = rng.gen_range(0.1..0.9) * f64::min(s2 / s1 * f64::min(p1 - 1.0, s1 - p1), p2 - 1.0 - beta2);
        let room1 = 1.0 - p1 / s1 - beta1 / s2;
        let room2 = 1.0 - p2 / s2 - alpha2 / s1;
        if room1 <= 0.0 || room2 <= 0.0 {
            continue;
        }
        let m1 = rng.gen_range(0.5..2.0);
        let m2 = rng.gen_range(0.5..2.0);
        return ExponentConfig {
            dim,
            p1,
            p2,
            alpha1,
            alpha2,
            beta1,
            beta2,
            m1,
            big_m1: m1 * rng.gen_range(1.0..3.0),
            m2,
            big_m2: m2 * rng.gen_range(1.0..3.0),
            zeta1: 1.0 / (room1 * rng.gen_range(0.5..0.95)),
            zeta2: 1.0 / (room2 * rng.gen_range(0.5..0.95)),
        };
    }
}

fn break_one(mut c: ExponentConfig, which: usize) -> ExponentConfig {
    let n = c.dim as f64;
    let (s1, s2) = (n * c.p1 / (n - c.p1), n * c.p2 / (n - c.p2));
    match which % 8 {
        0 => c.alpha1 = -1.5,
        1 => c.beta2 = -1.5,
        2 => c.m1 = c.big_m1 * 1.5,
        3 => c.m2 = c.big_m2 * 2.0,
        4 => c.alpha2 = -0.1,
        5 => c.beta1 = -0.1,
        6 => c.zeta1 = 2.0 / (1.0 + 1.0 - c.p1 / s1 - c.beta1 / s2),
        _ => c.zeta2 = 2.0 / (1.0 + 1.0 - c.p2 / s2 - c.alpha2 / s1),
    }
    c
}

fn hypothesis_checker() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    for i in 0..20 {
        let base = admissible_config(&mut rng);
        let (cfg, expected) = if i < 10 { (base, 0) } else { (break_one(base, i), 1) };
        let by_oracle = oracle(&cfg);
        ensure(by_oracle == expected, || format!("generator produced {by_oracle} violations, expected {expected}: {cfg:?}"))?;
        let report = validate(&cfg);
        let failed = report.failures().count();
        ensure((failed == 0) == (by_oracle == 0), || format!("disagreement on {cfg:?}: checker {failed}, oracle {by_oracle}"))?;
        agree += 1;
    }
    Ok(format!("{agree}/20 configs agree"))
}

// 6. Moser machinery

fn moser() -> Outcome {
    let cfg = ExponentConfig::standard();
    let s = kappa_sequence(3, 2.0, 4.0, 2.0, 0.0, KAPPA_TAIL, 20).map_err(|e| e.to_string())?;
    let head = [0.0, 1.0, 2.5, 4.75];
    ensure(s.kappa[..4].iter().zip(head).all(|(a, b)| (a - b).abs() < 1e-12), || format!("head {:?}", &s.kappa[..4]))?;
    let ratio = (s.kappa[20] + 1.0) / (s.kappa[19] + 1.0);
    ensure((ratio / 1.5 - 1.0).abs() < KAPPA_RATIO_REL, || format!("ratio at n=20 is {ratio}"))?;
    ensure(s.tail_bound < KAPPA_TAIL, || format!("tail {}", s.tail_bound))?;

    // hand recurrence, summed far past the tolerance
    let (mut k, mut inv, mut sq) = (0.0f64, 0.0, 0.0);
    for _ in 0..200 {
        k = (3.0 * (k + 1.0) - 1.0) / 2.0;
        inv += 1.0 / (k + 1.0);
        sq += 1.0 / (k + 1.0).sqrt();
    }
    ensure((s.inv_sum - inv).abs() < KAPPA_TAIL && (s.sqrt_sum - sq).abs() < KAPPA_TAIL, || {
        format!("sums {} {} vs {inv} {sq}", s.inv_sum, s.sqrt_sum)
    })?;

    let grid = Arc::new(RadialGrid::build(3, 8.0, 2048, Grading::Uniform).unwrap());
    let a = WeightSpec::gaussian(1.0, 1.0);
    let n1 = check_ha(&a, &cfg, &grid, Side::U, Some(2.0)).map_err(|e| e.to_string())?.norms;
    let n2 = check_ha(&a, &cfg, &grid, Side::V, None).map_err(|e| e.to_string())?.norms;
    let opts = MoserOptions { xi1: Some(2.0), ..MoserOptions::default() };
    let b = compute_bounds(&cfg, &n1, &n2, &opts, &plapsys::c4::c4).map_err(|e| e.to_string())?;
    ensure(b.r_inf >= 1.0, || format!("R = {}", b.r_inf))?;
    Ok(format!("ratio(20)={ratio:.5} inv_sum={inv:.6} sqrt_sum={sq:.6} tail={:.1e} R={:.4}", s.tail_bound, b.r_inf))
}

// 7. end to end

fn end_to_end() -> Outcome {
    let t = Instant::now();
    let out = run_solve(&std_config()).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let cert = &out.report.certificate;
    ensure(out.run.stages.len() == 6 && out.run.aborted_at.is_none(), || format!("aborted at {:?}", out.run.aborted_at))?;
    let mut worst_box: f64 = 0.0;
    for s in &out.run.stages {
        ensure(s.converged && s.iterations <= PICARD_MAX_ITER && s.final_distance < PICARD_DIST, || {
            format!("stage {}: {} iterations, distance {:.2e}", s.index, s.iterations, s.final_distance)
        })?;
        for h in &s.history {
            worst_box = worst_box.max(h.box_violation);
        }
    }
    ensure(worst_box <= BRACKET_TOL, || format!("box violation {worst_box:.2e}"))?;
    ensure(cert.max_u <= cert.r_inf && cert.max_v <= cert.r_inf, || format!("max {} {} vs R {}", cert.max_u, cert.max_v, cert.r_inf))?;
    ensure(cert.lpstar_u <= cert.rho && cert.lpstar_v <= cert.rho, || format!("Lp* {} {} vs rho {}", cert.lpstar_u, cert.lpstar_v, cert.rho))?;
    ensure(out.ctx.tests.len() == 20, || format!("{} test functions", out.ctx.tests.len()))?;
    ensure(cert.residual_u <= RESIDUAL_TOL && cert.residual_v <= RESIDUAL_TOL, || {
        format!("residuals {:.2e} {:.2e}", cert.residual_u, cert.residual_v)
    })?;
    let d = &cert.d1p_distances;
    ensure(d.len() >= 3 && d[d.len() - 3..].windows(2).all(|w| w[1] < w[0]), || format!("distances {d:?}"))?;
    ensure(elapsed < E2E_TIME, || format!("{elapsed:?}"))?;
    ensure(cert.passed, || format!("certificate failures {:?}", cert.failures))?;
    let iters: usize = out.run.stages.iter().map(|s| s.iterations).sum();
    Ok(format!(
        "{iters} iterations, max u {:.4} <= R {:.4}, Lp* {:.4} <= rho {:.4}, residual {:.1e}, {elapsed:.1?}",
        cert.max_u,
        cert.r_inf,
        cert.lpstar_u,
        cert.rho,
        cert.residual_u.max(cert.residual_v)
    ))
}

// 8. truncated inequality

fn truncated() -> Outcome {
    let mut cfg = std_config();
    cfg.a1 = cfg.a1.with_amplitude(6.0);
    cfg.a2 = cfg.a2.with_amplitude(6.0);
    let out: SolveOutcome = run_solve(&cfg).map_err(|e| e.to_string())?;
    let s = &out.run.state;
    ensure(s.u.max() > 1.0, || format!("max u = {}", s.u.max()))?;
    let ctx = &out.ctx;
    let t = truncated_inequality_check(&s.u, &s.v, &ctx.cfg, &ctx.a1, &ctx.a2, &ctx.tests, TRUNCATED_TOL)
        .map_err(|e| e.to_string())?;
    ensure(ctx.tests.len() == 20, || format!("{} test functions", ctx.tests.len()))?;
    ensure(t.passed, || format!("worst excess {:.2e}", t.worst_excess))?;
    Ok(format!("max u {:.3}, worst excess {:.1e} over 20 test functions", s.u.max(), t.worst_excess))
}

// 9. truncation radius

fn truncation_sensitivity() -> Outcome {
    let base = std_config();
    let mut wide = base.clone();
    wide.grid.r_max = 16.0;
    let u8 = run_solve(&base).map_err(|e| e.to_string())?.run.state.u.values()[0];
    let u16 = run_solve(&wide).map_err(|e| e.to_string())?.run.state.u.values()[0];
    let rel = (u16 - u8).abs() / u8;
    ensure(rel < RMAX_REL, || format!("u(0) {u8} -> {u16}"))?;
    Ok(format!("u(0) {u8:.6} -> {u16:.6}, relative change {rel:.1e}"))
}

// 10. determinism

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("std.toml");
    std::fs::write(&cfg, STD).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let status = Command::new(env!("CARGO_BIN_EXE_plapsys"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .arg("solve")
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.success(), || format!("run {k} exited with {status}"))?;
        runs.push(read_all(&out));
    }
    ensure(runs[0].len() >= 9, || format!("only {} files", runs[0].len()))?;
    for ((na, a), (nb, b)) in runs[0].iter().zip(&runs[1]) {
        ensure(na == nb && a == b, || format!("{na} differs"))?;
    }
    Ok(format!("{} files identical", runs[0].len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("manufactured solutions", manufactured),
        ("operator properties", operator_properties),
        ("simon inequalities", simon),
        ("interpolation inequality", interpolation),
        ("hypothesis checker", hypothesis_checker),
        ("moser machinery", moser),
        ("end-to-end solve", end_to_end),
        ("truncated inequality", truncated),
        ("truncation sensitivity", truncation_sensitivity),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[{:>2}] PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("[{:>2}] FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
