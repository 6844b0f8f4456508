use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use plapsys::commands::{self, SweepParam};
use plapsys::config::parse_fraction;
use plapsys::{CliError, Format, RunConfig, Status};

#[derive(Parser)]
#[command(name = "plapsys", version, about = "Solver and bound calculator for singular p-Laplacian systems")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `sweep` (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output formats (overrides `output.formats`); repeatable
    #[arg(long = "format", global = true, value_parser = parse_format)]
    formats: Vec<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate exponents and weights
    Check,
    /// Compute rho, R and the full constant ledger
    Bounds,
    /// Run the continuation and certify the result
    Solve,
    /// Repeat `solve` over values of one parameter
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values; fractions such as 1/64 allowed
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_fraction(s).map_err(CliError::Config))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Config("empty value list".into()));
    }
    Ok(values)
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = RunConfig::load(&path)?;
    let formats = if cli.formats.is_empty() { cfg.formats.clone() } else { cli.formats.clone() };
    let out_dir = cli.out.or_else(|| cfg.output_dir.clone());

    match cli.command {
        Command::Check => {
            let report = commands::run_check(&cfg)?;
            let json = commands::to_json(&report);
            print!("{json}");
            if let Some(dir) = &out_dir {
                commands::ensure_dir(dir)?;
                std::fs::write(dir.join("check.json"), &json)?;
            }
            if !report.admissible {
                eprintln!("inadmissible: {}", report.failing_checks().join(", "));
            }
            Ok(if report.admissible { Status::Pass } else { Status::Fail })
        }
        Command::Bounds => {
            let report = commands::run_bounds(&cfg)?;
            let json = commands::to_json(&report);
            print!("{json}");
            if let Some(dir) = &out_dir {
                commands::ensure_dir(dir)?;
                std::fs::write(dir.join("bounds.json"), &json)?;
            }
            Ok(Status::Pass)
        }
        Command::Solve => {
            let dir = out_dir.unwrap_or_else(|| PathBuf::from("out"));
            commands::ensure_dir(&dir)?;
            let outcome = commands::run_solve(&cfg)?;
            commands::write_solve(&outcome, &dir, &formats)?;
            let c = &outcome.report.certificate;
            eprintln!(
                "{}: {} stages, max u = {}, max v = {}, R = {}, rho = {}",
                outcome.report.status,
                outcome.run.stages.len(),
                c.max_u,
                c.max_v,
                c.r_inf,
                c.rho
            );
            for f in &c.failures {
                eprintln!("  failed: {f}");
            }
            Ok(outcome.status)
        }
        Command::Sweep { param, values } => {
            let values = parse_values(&values)?;
            let dir = out_dir.unwrap_or_else(|| PathBuf::from("out"));
            let sweep = commands::run_sweep(&cfg, param, &values, cli.jobs)?;
            commands::write_sweep(&sweep, param, &dir, &formats)?;
            print!("{}", commands::sweep_csv(&sweep.rows));
            let worst = sweep
                .outcomes
                .iter()
                .map(|o| match o {
                    Ok(out) => out.status.code(),
                    Err(e) => e.exit_code(),
                })
                .max()
                .unwrap_or(0);
            Ok(match worst {
                0 => Status::Pass,
                3 => Status::NotConverged,
                _ => Status::Fail,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
