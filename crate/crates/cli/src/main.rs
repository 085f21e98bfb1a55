//! Scenario-driven command line front end for the percuss impact engine.
//!
//! Subcommands:
//!
//! - `resolve`  — resolve the scenario's initial state as a single impact
//!   and report the split, branch, impulse, right velocity, and energy
//!   change as an aligned table plus a JSON object.
//! - `simulate` — run the event-driven simulation and write `samples.csv`
//!   and `events.csv` (or `trajectory.json`).
//! - `sweep`    — resolve the initial impact across a parameter range and
//!   emit one summary row per value.
//! - `check`    — run scenario diagnostics (gradient finite differences,
//!   metric definiteness, constraint ranks, oracle comparisons).
//!
//! Exit codes: 0 success, 1 usage or schema error, 2 numerical or domain
//! failure.

mod checks;
mod output;
mod scenario;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use percuss_core::sim::{run_simulation, sweep, RunOutcome};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Schema(String),
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Schema(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Schema(msg) => write!(f, "schema error: {msg}"),
            CliError::Domain(msg) => write!(f, "{msg}"),
        }
    }
}

fn domain(e: percuss_core::Error) -> CliError {
    match e {
        percuss_core::Error::UnknownSweepParameter(name) => {
            CliError::Usage(format!("unknown parameter '{name}'"))
        }
        other => CliError::Domain(other.to_string()),
    }
}

/// Expression evaluation inside the scenario file (initial-state entries)
/// is a file-content problem, not a numerical one.
fn schema(e: percuss_core::Error) -> CliError {
    CliError::Schema(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "percuss",
    version,
    about = "Frictional single-point impacts of holonomic systems: resolve, simulate, sweep, check"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve the scenario's initial state as a single impact.
    Resolve {
        #[arg(long)]
        scenario: PathBuf,
        /// Directory for resolve.json (report always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv prints the table and the JSON object; json prints JSON only.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the event-driven simulation and write trajectory files.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (default: the scenario's output.path, else ".").
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Resolve the initial impact across a range of one named parameter.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Parameter name: `law.<coeff>`, `model.<param>`, or a scenario param.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        count: usize,
        /// Directory for sweep.csv (summary always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run scenario diagnostics; exit 0 only when every check passes.
    Check {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Resolve { scenario, out, format } => cmd_resolve(&scenario, out.as_deref(), format),
        Command::Simulate { scenario, out, format } => {
            cmd_simulate(&scenario, out.as_deref(), format)
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            count,
            out,
            format,
        } => cmd_sweep(&scenario, &param, from, to, count, out.as_deref(), format),
        Command::Check { scenario } => cmd_check(&scenario),
    }
}

fn cmd_resolve(path: &Path, out: Option<&Path>, format: Option<Format>) -> Result<(), CliError> {
    let sc = scenario::load(path)?;
    let config = sc.template.resolve_config().map_err(schema)?;
    let split = config.model.split(&config.initial).map_err(domain)?;
    let outcome = config
        .model
        .resolve(&config.initial, &config.law)
        .map_err(domain)?;
    let json = output::resolve_json(config.model.coords(), &split, &outcome, &config.initial.qdot);
    let pretty = serde_json::to_string_pretty(&json).expect("report serializes");
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            print!(
                "{}",
                output::resolve_table(
                    config.model.coords(),
                    &split,
                    &outcome,
                    &config.initial.qdot
                )
            );
            println!("{pretty}");
        }
        Format::Json => println!("{pretty}"),
    }
    if let Some(dir) = out {
        write_file(&dir.join("resolve.json"), &pretty)?;
    }
    Ok(())
}

fn cmd_simulate(path: &Path, out: Option<&Path>, format: Option<Format>) -> Result<(), CliError> {
    let sc = scenario::load(path)?;
    if !sc.has_simulation {
        return Err(CliError::Schema(format!(
            "{}: simulate needs a simulation block",
            path.display()
        )));
    }
    let config = sc.template.resolve_config().map_err(schema)?;
    let trajectory = run_simulation(&config).map_err(domain)?;
    let n = config.model.dim();

    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| sc.output.as_ref().and_then(|o| o.path.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    let format = format.unwrap_or_else(|| {
        match sc.output.as_ref().and_then(|o| o.format.as_deref()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    });

    let written = match format {
        Format::Csv => {
            let samples = out_dir.join("samples.csv");
            let events = out_dir.join("events.csv");
            write_file(&samples, &output::samples_csv(&trajectory, n))?;
            write_file(&events, &output::events_csv(&trajectory, n))?;
            vec![samples, events]
        }
        Format::Json => {
            let file = out_dir.join("trajectory.json");
            let json = serde_json::to_string_pretty(&output::trajectory_json(&trajectory))
                .expect("trajectory serializes");
            write_file(&file, &json)?;
            vec![file]
        }
    };

    let outcome = match trajectory.outcome {
        RunOutcome::ReachedEnd => "reached t_end".to_string(),
        RunOutcome::MaxImpacts => "impact budget exhausted".to_string(),
        RunOutcome::Settled { time, speed } => {
            format!("settled at t = {time:.6} (approach speed {speed:.3e})")
        }
    };
    println!(
        "{} impacts, {} samples, {outcome}",
        trajectory.events.len(),
        trajectory.samples.len()
    );
    for file in written {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn cmd_sweep(
    path: &Path,
    param: &str,
    from: f64,
    to: f64,
    count: usize,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<(), CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let sc = scenario::load(path)?;
    let values: Vec<f64> = if count == 1 {
        vec![from]
    } else {
        (0..count)
            .map(|i| from + (to - from) * i as f64 / (count as f64 - 1.0))
            .collect()
    };
    let rows = sweep(&sc.template, param, &values).map_err(domain)?;
    let n = sc.template.model.dim();
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let csv = output::sweep_csv(&rows, n);
            print!("{csv}");
            if let Some(dir) = out {
                write_file(&dir.join("sweep.csv"), &csv)?;
            }
        }
        Format::Json => {
            let json: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "value": r.value,
                        "branch": r.branch.to_string(),
                        "right_velocity": r.right_velocity.iter().copied().collect::<Vec<f64>>(),
                        "dE": r.delta_energy,
                    })
                })
                .collect();
            let pretty = serde_json::to_string_pretty(&json).expect("rows serialize");
            println!("{pretty}");
            if let Some(dir) = out {
                write_file(&dir.join("sweep.json"), &pretty)?;
            }
        }
    }
    Ok(())
}

fn cmd_check(path: &Path) -> Result<(), CliError> {
    let sc = scenario::load(path)?;
    let config = sc.template.resolve_config().map_err(schema)?;
    let (lines, all_pass) = checks::run(&config);
    for line in &lines {
        println!(
            "check {:<24}{}  {}",
            line.name,
            if line.pass { "PASS" } else { "FAIL" },
            line.detail
        );
    }
    if all_pass {
        println!("overall PASS");
        Ok(())
    } else {
        println!("overall FAIL");
        Err(CliError::Domain("one or more checks failed".into()))
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Domain(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))
}
