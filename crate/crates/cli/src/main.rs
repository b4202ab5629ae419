//! `omx`: runs a named experiment from a TOML config and writes CSV + JSON.

mod config;
mod output;
mod scenarios;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("at {point}: {source}")]
    Point { point: String, source: omx_core::Error },
    #[error(transparent)]
    Core(#[from] omx_core::Error),
    #[error("max relative deviation {max_rel:.4e} exceeds tolerance {tolerance:.4e}")]
    Tolerance { max_rel: f64, tolerance: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Errors caused by the inputs rather than by the numerics.
fn is_input_error(e: &omx_core::Error) -> bool {
    use omx_core::Error::*;
    matches!(
        e,
        MissingParameter(_)
            | InconsistentParameters(_)
            | InvalidGrid(_)
            | InvalidDimension { .. }
            | Resonant
            | EliminationInvalid(_)
            | NotPinned(_)
            | TruncationTooSmall { .. }
            | UnknownMode(_)
            | OccupationOutOfRange { .. }
            | NegativeRate(_)
            | DriveTooStrong(_)
            | NoGate
    )
}

impl CliError {
    /// 2 config, 3 solver, 4 tolerance; 1 for output failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Point { source: e, .. } | CliError::Core(e) => {
                if is_input_error(e) {
                    2
                } else {
                    3
                }
            }
            CliError::Tolerance { .. } => 4,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "omx", version, about = "Multimode optomechanics experiments")]
struct Cli {
    #[arg(value_enum)]
    scenario: Scenario,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let cfg = config::parse(&text, cli.scenario)?;
    fs::create_dir_all(&cli.out)?;
    let run = scenarios::run(&cfg);
    for (name, t) in &run.tables {
        let path = cli.out.join(format!("{name}.csv"));
        output::write_csv(&path, &cfg, t)?;
        println!("{}: {} rows", path.display(), t.rows.len());
    }
    let json = cli.out.join(format!("{}.json", cfg.scenario.name()));
    output::write_json(&json, &cfg, &run.tables, &run.summary)?;
    for (k, v) in &run.summary {
        println!("{k}: {v}");
    }
    match run.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("omx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
