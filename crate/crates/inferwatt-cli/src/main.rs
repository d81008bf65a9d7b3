//! `inferwatt` — train the latency models, estimate per-prompt latency,
//! energy, and carbon, validate against leaderboard measurements, rank
//! model candidates, and inspect the hardware table.
//!
//! Exit codes: 0 on success, 1 when a computation or a validation row
//! fails, 2 on usage errors and missing or malformed inputs.

/// `println!` that ends the process quietly when stdout's reader is gone.
macro_rules! outln {
    ($($arg:tt)*) => { crate::output::emit(&format!($($arg)*)) };
}

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::FileConfig;
use crate::output::OutputFormat;

/// A command failure carrying the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    /// A usage or input problem: exit code 2.
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<inferwatt_core::Error> for Failure {
    fn from(err: inferwatt_core::Error) -> Self {
        use inferwatt_core::Error;
        // Missing or malformed inputs are usage problems (2); failures
        // inside a computation that got valid-looking inputs are 1.
        let code = match &err {
            Error::Io { .. }
            | Error::CsvFormat { .. }
            | Error::InvalidField { .. }
            | Error::UnknownHardware { .. }
            | Error::UnknownRegion { .. }
            | Error::InvalidParameter { .. }
            | Error::ModelFile { .. }
            | Error::MissingModel { .. }
            | Error::InvalidRequest { .. }
            | Error::EmptyInput { .. } => 2,
            Error::DuplicateHardware { .. }
            | Error::InsufficientData { .. }
            | Error::DegenerateFit { .. }
            | Error::DimensionMismatch { .. }
            | Error::LengthMismatch { .. }
            | Error::ZeroGroundTruth { .. }
            | Error::NonFiniteOutput { .. } => 1,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "inferwatt",
    version,
    about = "Per-prompt latency, energy, and carbon estimates for LLM inference"
)]
struct Cli {
    /// TOML config file with defaults for paths and assumptions.
    #[arg(long, global = true, env = "INFERWATT_CONFIG")]
    config: Option<PathBuf>,
    /// Output format; defaults to the config file's `format`, else a table.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the three models from sample CSVs and save them.
    Train(commands::TrainArgs),
    /// Estimate latency, energy, and carbon for one request.
    Estimate(commands::EstimateArgs),
    /// Score the models against a leaderboard CSV.
    Validate(commands::ValidateArgs),
    /// Order candidate models by estimated carbon footprint.
    Rank(commands::RankArgs),
    /// List the known accelerators.
    Hardware(commands::HardwareArgs),
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let file = FileConfig::resolve(cli.config.as_deref())?;
    let format = match (cli.format, &file.format) {
        (Some(flag), _) => flag,
        (None, Some(name)) => OutputFormat::parse_name(name).ok_or_else(|| {
            Failure::usage(format!(
                "config: invalid format `{name}` (expected `table` or `json`)"
            ))
        })?,
        (None, None) => OutputFormat::Table,
    };
    match &cli.command {
        Command::Train(args) => commands::cmd_train(args, &file, format),
        Command::Estimate(args) => commands::cmd_estimate(args, &file, format),
        Command::Validate(args) => commands::cmd_validate(args, &file, format),
        Command::Rank(args) => commands::cmd_rank(args, &file, format),
        Command::Hardware(args) => commands::cmd_hardware(args, &file, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
