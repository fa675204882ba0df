use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ansatz_cli::config::{Equation, ReportFormat, ScenarioConfig};
use ansatz_cli::runner::{passes_gate, run_scenario, RunError};

/// Construct implicit PDE solutions from a scenario config and verify
/// their residuals.
///
/// Exit status: 0 when the residual gate passes, 1 on residual failure,
/// 2 on usage errors, 3 on configuration errors, 4 on i/o errors.
#[derive(Parser, Debug)]
#[command(name = "ansatz", version, about)]
struct Cli {
    /// Scenario configuration file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Report output path (default: report.<fmt> in ANSATZ_OUT_DIR or the
    /// working directory).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,

    /// Uniform grid refinement multiplier applied to every axis count.
    #[arg(long)]
    grid_scale: Option<f64>,

    /// Override the residual acceptance tolerance.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Override the scenario RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// List the supported equation ids and exit.
    #[arg(long)]
    list_equations: bool,
}

const EXIT_RESIDUAL_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse(); // unknown flags exit 2 via clap

    if cli.list_equations {
        for eq in Equation::ALL {
            println!("{}", eq.id());
        }
        return ExitCode::SUCCESS;
    }

    let Some(config_path) = cli.config.as_ref() else {
        eprintln!("error: --config <path> is required (or use --list-equations)");
        return ExitCode::from(EXIT_USAGE);
    };

    let text = match std::fs::read_to_string(config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut config = match ScenarioConfig::from_json(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    if let Some(scale) = cli.grid_scale {
        if !(scale.is_finite() && scale > 0.0) {
            eprintln!("error: --grid-scale must be a positive number");
            return ExitCode::from(EXIT_USAGE);
        }
        for axis in &mut config.grid {
            axis.count = ((axis.count as f64 * scale).ceil() as usize).max(1);
        }
    }
    if let Some(tol) = cli.tolerance {
        config.tolerances.residual = tol;
    }
    if let Some(seed) = cli.seed {
        config.rng_seed = seed;
    }

    let report = match run_scenario(&config) {
        Ok(report) => report,
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(RunError::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };

    let format = match cli.format.as_deref() {
        Some("csv") => ReportFormat::Csv,
        Some(_) => ReportFormat::Json,
        None => config.output.as_ref().map(|o| o.format).unwrap_or_default(),
    };
    let out_path = cli
        .out
        .clone()
        .or_else(|| {
            config
                .output
                .as_ref()
                .and_then(|o| o.path.as_ref())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| {
            let dir = std::env::var("ANSATZ_OUT_DIR").unwrap_or_else(|_| ".".into());
            PathBuf::from(dir).join(format!("report.{}", format.extension()))
        });

    let body = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    if let Err(e) = std::fs::write(&out_path, body) {
        eprintln!("error: cannot write {}: {e}", out_path.display());
        return ExitCode::from(EXIT_IO);
    }

    let passed = passes_gate(&report.summary, config.tolerances.residual);
    println!(
        "{}: {}/{} converged, max residual {} -> {} ({})",
        report.scenario,
        report.summary.converged_points,
        report.summary.total_points,
        report
            .summary
            .max_normalized
            .map_or_else(|| "n/a".into(), |m| format!("{m:.3e}")),
        out_path.display(),
        if passed { "pass" } else { "FAIL" },
    );
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_RESIDUAL_FAILURE)
    }
}
