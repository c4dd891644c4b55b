use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use sasaki_lab::scenario::{run, Overrides, Scenario, TaskName};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// Run a verification scenario and print its report.
///
/// Exit status: 0 when every check passes, 1 when a check fails,
/// 2 for usage and configuration errors.
#[derive(Debug, Parser)]
#[command(name = "sasaki-lab", version)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Number of random samples [default: config, then 100].
    #[arg(long)]
    samples: Option<usize>,
    /// Sampling seed [default: config, then 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the primary tolerance of the task.
    #[arg(long)]
    tol: Option<f64>,
    /// Task to run; overrides the config.
    #[arg(long, value_enum)]
    task: Option<TaskName>,
    /// Include wall time in the report (makes it run dependent).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let scenario = match Scenario::load(&cli.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        task: cli.task,
        samples: cli.samples,
        seed: cli.seed,
        tolerance: cli.tol,
    };
    let mut report = match run(&scenario, &overrides) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if cli.timing {
        report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    match cli.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Table => print!("{}", report.to_table()),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
