//! Command-line driver: verification sweeps, spectra, Feynman-Kac runs,
//! noise calibration and Haar checks, with JSON or CSV reports.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;

use clap::Parser;

pub use config::{Command, Format, Options, RunConfig};
pub use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl From<spinfock::Error> for CliError {
    fn from(e: spinfock::Error) -> Self {
        match e {
            spinfock::Error::Numeric(m) => CliError::Numeric(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spinfock", version, about = "Fermions on Spin(2n+1): algebraic checks and path-space Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

/// Resolves the config, runs the command and renders the report.
pub fn execute(cli: &Cli) -> Result<(RunConfig, Report, String), CliError> {
    let config = RunConfig::resolve(cli.command, &cli.options)?;
    let report = commands::run_command(&config)?;
    let text = match config.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    Ok((config, report, text))
}

/// Parses arguments, runs, writes the report and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli).and_then(|(config, report, text)| {
        match &config.out {
            Some(path) => fs::write(path, &text)?,
            None => print!("{text}"),
        }
        Ok(report)
    }) {
        Ok(report) if report.passed() => EXIT_PASS,
        Ok(report) => {
            for name in &report.failures {
                eprintln!("check failed: {name}");
            }
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
