//! Subcommand implementations. Each `run_*` returns a serializable report;
//! `write_*` puts the artifacts of a run on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use plapsys_core::bounds::{compute_bounds, BoundsReport, C4Estimate};
use plapsys_core::fixedpoint::{
    certify, continuation, truncated_inequality_check, Certificate, ContinuationResult, ProblemContext,
    StageReport, TruncatedReport,
};
use plapsys_core::hypotheses::{derive_exponents, validate, DerivedExponents, ValidationReport};
use plapsys_core::weights::{check_ha, WeightReport};
use plapsys_core::{RadialGrid, Side};

use crate::c4;
use crate::config::{Format, RunConfig};
use crate::error::{CliError, Status};
use crate::svg::{line_plot, Series};

pub fn build_grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>, CliError> {
    let g = &cfg.grid;
    Ok(Arc::new(RadialGrid::build(cfg.exponents.dim, g.r_max, g.nodes, g.grading)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightPair {
    pub a1: WeightReport,
    pub a2: WeightReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub config_hash: String,
    pub admissible: bool,
    pub validation: ValidationReport,
    pub derived: Option<DerivedExponents>,
    pub weights: Option<WeightPair>,
}

impl CheckReport {
    pub fn failing_checks(&self) -> Vec<String> {
        let mut names: Vec<String> = self.validation.failures().map(|c| c.name.clone()).collect();
        if let Some(w) = &self.weights {
            names.extend(w.a1.report.failures().chain(w.a2.report.failures()).map(|c| c.name.clone()));
        }
        names
    }
}

/// Exponent inequalities and weight integrability.
pub fn run_check(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let validation = validate(&cfg.exponents);
    let derived = derive_exponents(&cfg.exponents).ok();
    let weights = match derived {
        Some(_) if validation.overall => {
            let grid = build_grid(cfg)?;
            Some(WeightPair {
                a1: check_ha(&cfg.a1, &cfg.exponents, &grid, Side::U, cfg.moser.xi1)?,
                a2: check_ha(&cfg.a2, &cfg.exponents, &grid, Side::V, cfg.moser.xi2)?,
            })
        }
        _ => None,
    };
    let admissible = validation.overall
        && weights.as_ref().is_some_and(|w| w.a1.report.overall && w.a2.report.overall);
    Ok(CheckReport { config_hash: cfg.hash(), admissible, validation, derived, weights })
}

/// Named constants of a run, flattened for quick inspection.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantLedger {
    pub s1: f64,
    pub s2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3_u: f64,
    pub c3_v: f64,
    pub c4_u: f64,
    pub c4_v: f64,
    pub c5_u: f64,
    pub c5_v: f64,
    pub rho: f64,
    pub r_inf: f64,
    pub r_inf_from_rho: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl ConstantLedger {
    fn new(b: &BoundsReport) -> Self {
        Self {
            s1: b.sobolev.s1,
            s2: b.sobolev.s2,
            c1: b.lpstar.c1,
            c2: b.lpstar.c2,
            c3_u: b.moser_u.c3,
            c3_v: b.moser_v.c3,
            c4_u: b.moser_u.c4,
            c4_v: b.moser_v.c4,
            c5_u: b.moser_u.c5,
            c5_v: b.moser_v.c5,
            rho: b.rho,
            r_inf: b.r_inf,
            r_inf_from_rho: b.r_inf_from_rho,
            xi1: b.moser_u.sequence.xi,
            xi2: b.moser_v.sequence.xi,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsOutput {
    pub config_hash: String,
    pub constants: ConstantLedger,
    pub c4_search: [C4Estimate; 2],
    pub weights: WeightPair,
    pub bounds: BoundsReport,
}

fn require_admissible(check: &CheckReport) -> Result<(), CliError> {
    if check.admissible {
        Ok(())
    } else {
        Err(CliError::Inadmissible(format!("failing checks: {}", check.failing_checks().join(", "))))
    }
}

/// `rho` and `R` for the configured exponents and weights.
pub fn run_bounds(cfg: &RunConfig) -> Result<BoundsOutput, CliError> {
    let check = run_check(cfg)?;
    require_admissible(&check)?;
    let weights = check.weights.expect("admissible configs carry weight reports");
    let bounds = compute_bounds(&cfg.exponents, &weights.a1.norms, &weights.a2.norms, &cfg.moser, &c4::c4)?;
    Ok(BoundsOutput {
        config_hash: check.config_hash,
        constants: ConstantLedger::new(&bounds),
        c4_search: [c4::c4_estimate(cfg.exponents.p1), c4::c4_estimate(cfg.exponents.p2)],
        weights,
        bounds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StageFile<'a> {
    pub config_hash: &'a str,
    pub constants: &'a ConstantLedger,
    pub stage: &'a StageReport,
}

/// Stage summary without the per-iteration history.
#[derive(Debug, Clone, Serialize)]
pub struct StageSummary {
    pub index: usize,
    pub eps: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_distance: f64,
    pub max_box_violation: f64,
    pub u0: f64,
    pub v0: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub lpstar_u: f64,
    pub lpstar_v: f64,
    pub d1p_u: Option<f64>,
    pub d1p_v: Option<f64>,
    pub residual_u: f64,
    pub residual_v: f64,
}

impl From<&StageReport> for StageSummary {
    fn from(s: &StageReport) -> Self {
        Self {
            index: s.index,
            eps: s.eps,
            iterations: s.iterations,
            converged: s.converged,
            final_distance: s.final_distance,
            max_box_violation: s.max_box_violation,
            u0: s.u0,
            v0: s.v0,
            max_u: s.max_u,
            max_v: s.max_v,
            lpstar_u: s.lpstar_u,
            lpstar_v: s.lpstar_v,
            d1p_u: s.d1p_u,
            d1p_v: s.d1p_v,
            residual_u: s.residual_u,
            residual_v: s.residual_v,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub config_hash: String,
    pub status: &'static str,
    pub constants: ConstantLedger,
    pub bounds: BoundsReport,
    pub stages: Vec<StageSummary>,
    pub aborted_at: Option<usize>,
    pub certificate: Certificate,
    pub truncated_inequalities: TruncatedReport,
}

pub struct SolveOutcome {
    pub report: SolveReport,
    pub run: ContinuationResult,
    pub ctx: ProblemContext,
    pub status: Status,
}

/// Tolerance of the superlevel-set inequality check.
pub const TRUNCATED_TOL: f64 = 1e-6;

pub fn run_solve(cfg: &RunConfig) -> Result<SolveOutcome, CliError> {
    let b = run_bounds(cfg)?;
    let grid = build_grid(cfg)?;
    let ctx = ProblemContext::with_bounds(cfg.exponents, &cfg.a1, &cfg.a2, grid, cfg.grid.boundary, &b.bounds)?;
    let run = continuation(&ctx, &cfg.continuation)?;
    let certificate = certify(&ctx, &run, &cfg.certification)?;
    let truncated = truncated_inequality_check(
        &run.state.u,
        &run.state.v,
        &ctx.cfg,
        &ctx.a1,
        &ctx.a2,
        &ctx.tests,
        TRUNCATED_TOL,
    )?;
    let status = if run.aborted_at.is_some() {
        Status::NotConverged
    } else if certificate.passed && truncated.passed {
        Status::Pass
    } else {
        Status::Fail
    };
    let report = SolveReport {
        config_hash: b.config_hash,
        status: match status {
            Status::Pass => "pass",
            Status::Fail => "certification_failed",
            Status::NotConverged => "not_converged",
        },
        constants: b.constants,
        bounds: b.bounds,
        stages: run.stages.iter().map(StageSummary::from).collect(),
        aborted_at: run.aborted_at,
        certificate,
        truncated_inequalities: truncated,
    };
    Ok(SolveOutcome { report, run, ctx, status })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// `r,u,v,u_lo,v_lo,u_hi,v_hi` on every node.
pub fn profiles_csv(out: &SolveOutcome) -> String {
    let env = &out.run.envelopes;
    let cols = [
        out.ctx.grid.nodes(),
        out.run.state.u.values(),
        out.run.state.v.values(),
        env.u_lo.values(),
        env.v_lo.values(),
        env.u_hi.values(),
        env.v_hi.values(),
    ];
    let mut s = String::from("r,u,v,u_lo,v_lo,u_hi,v_hi\n");
    for j in 0..cols[0].len() {
        let row: Vec<String> = cols.iter().map(|c| format!("{}", c[j])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn profiles_svg(out: &SolveOutcome) -> String {
    let env = &out.run.envelopes;
    let (u, v) = (&out.run.state.u, &out.run.state.v);
    let y_max = 1.25 * u.max().max(v.max());
    let series = [
        Series { label: "u", values: u.values(), color: "#1f77b4", dashed: false },
        Series { label: "v", values: v.values(), color: "#d62728", dashed: false },
        Series { label: "u_lo", values: env.u_lo.values(), color: "#1f77b4", dashed: true },
        Series { label: "v_lo", values: env.v_lo.values(), color: "#d62728", dashed: true },
        Series { label: "u_hi (clipped)", values: env.u_hi.values(), color: "#7f7f7f", dashed: true },
        Series { label: "v_hi (clipped)", values: env.v_hi.values(), color: "#bcbd22", dashed: true },
    ];
    let title = format!("eps = {}", out.run.state.eps);
    line_plot(&title, out.ctx.grid.nodes(), &series, y_max)
}

/// Writes `report.json` and `stage_XX.json`, `profiles.csv`, `profiles.svg`
/// according to `formats`.
pub fn write_solve(out: &SolveOutcome, dir: &Path, formats: &[Format]) -> Result<(), CliError> {
    ensure_dir(dir)?;
    if formats.contains(&Format::Json) {
        write(&dir.join("report.json"), &to_json(&out.report))?;
        for st in &out.run.stages {
            let file = StageFile { config_hash: &out.report.config_hash, constants: &out.report.constants, stage: st };
            write(&dir.join(format!("stage_{:02}.json", st.index)), &to_json(&file))?;
        }
    }
    if formats.contains(&Format::Csv) {
        write(&dir.join("profiles.csv"), &profiles_csv(out))?;
    }
    if formats.contains(&Format::Svg) {
        write(&dir.join("profiles.svg"), &profiles_svg(out))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum SweepParam {
    RMax,
    Nodes,
    EpsFloor,
    Xi1,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::RMax => "r_max",
            SweepParam::Nodes => "nodes",
            SweepParam::EpsFloor => "eps_floor",
            SweepParam::Xi1 => "xi1",
        }
    }

    /// Copy of `cfg` with the parameter set to `value`.
    pub fn apply(self, cfg: &RunConfig, value: f64) -> Result<RunConfig, CliError> {
        let mut c = cfg.clone();
        match self {
            SweepParam::RMax => c.grid.r_max = value,
            SweepParam::Nodes => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(CliError::Config(format!("nodes must be an integer >= 2, got {value}")));
                }
                c.grid.nodes = value as usize;
            }
            SweepParam::EpsFloor => {
                if !(value > 0.0 && value <= 0.25) {
                    return Err(CliError::Config(format!("eps_floor must lie in ]0, 1/4], got {value}")));
                }
                let mut sched = vec![0.25];
                while sched.last().unwrap() * 0.5 >= value * (1.0 - 1e-12) {
                    sched.push(sched.last().unwrap() * 0.5);
                }
                c.continuation.schedule = sched;
            }
            SweepParam::Xi1 => c.moser.xi1 = Some(value),
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub status: String,
    pub stages: usize,
    pub iterations: usize,
    pub eps_final: f64,
    pub u0: f64,
    pub v0: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub lpstar_u: f64,
    pub lpstar_v: f64,
    pub rho: f64,
    pub r_inf: f64,
    pub residual_u: f64,
    pub residual_v: f64,
}

impl SweepRow {
    fn from_outcome(value: f64, out: &SolveOutcome) -> Self {
        let last = out.run.stages.last().expect("at least one stage");
        Self {
            value,
            status: out.report.status.to_string(),
            stages: out.run.stages.len(),
            iterations: out.run.stages.iter().map(|s| s.iterations).sum(),
            eps_final: last.eps,
            u0: last.u0,
            v0: last.v0,
            max_u: last.max_u,
            max_v: last.max_v,
            lpstar_u: last.lpstar_u,
            lpstar_v: last.lpstar_v,
            rho: out.report.constants.rho,
            r_inf: out.report.constants.r_inf,
            residual_u: last.residual_u,
            residual_v: last.residual_v,
        }
    }

    fn failed(value: f64, err: &CliError) -> Self {
        let nan = f64::NAN;
        Self {
            value,
            status: format!("error: {err}").replace(',', ";"),
            stages: 0,
            iterations: 0,
            eps_final: nan,
            u0: nan,
            v0: nan,
            max_u: nan,
            max_v: nan,
            lpstar_u: nan,
            lpstar_v: nan,
            rho: nan,
            r_inf: nan,
            residual_u: nan,
            residual_v: nan,
        }
    }
}

pub const SWEEP_HEADER: &str =
    "value,status,stages,iterations,eps_final,u0,v0,max_u,max_v,lpstar_u,lpstar_v,rho,r_inf,residual_u,residual_v";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.value,
            r.status,
            r.stages,
            r.iterations,
            r.eps_final,
            r.u0,
            r.v0,
            r.max_u,
            r.max_v,
            r.lpstar_u,
            r.lpstar_v,
            r.rho,
            r.r_inf,
            r.residual_u,
            r.residual_v
        );
    }
    s
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub outcomes: Vec<Result<SolveOutcome, CliError>>,
}

/// One solve per value, run on a pool of `jobs` threads (0 = rayon default).
pub fn run_sweep(cfg: &RunConfig, param: SweepParam, values: &[f64], jobs: usize) -> Result<SweepOutcome, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let configs = values.iter().map(|&v| param.apply(cfg, v)).collect::<Result<Vec<_>, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<SolveOutcome, CliError>> = pool.install(|| configs.par_iter().map(run_solve).collect());
    let rows = values
        .iter()
        .zip(&outcomes)
        .map(|(&v, o)| match o {
            Ok(out) => SweepRow::from_outcome(v, out),
            Err(e) => SweepRow::failed(v, e),
        })
        .collect();
    Ok(SweepOutcome { rows, outcomes })
}

/// `sweep.csv` plus one report per value, named by the value.
pub fn write_sweep(sweep: &SweepOutcome, param: SweepParam, dir: &Path, formats: &[Format]) -> Result<(), CliError> {
    ensure_dir(dir)?;
    write(&dir.join("sweep.csv"), &sweep_csv(&sweep.rows))?;
    for (row, out) in sweep.rows.iter().zip(&sweep.outcomes) {
        if let Ok(out) = out {
            write_solve(out, &dir.join(format!("{}_{}", param.name(), row.value)), formats)?;
        }
    }
    Ok(())
}
