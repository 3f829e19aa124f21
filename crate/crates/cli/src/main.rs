//! `oneshot-rsp` command-line front end.
//!
//! Exit codes: 0 success, 1 a reported assertion failed, 2 configuration or
//! parse error, 3 solver failure. Logging goes to standard error at the level
//! named by `ONESHOT_RSP_LOG` (`error`, `info` or `debug`).

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use log::error;
use oneshot_rsp::Error;

use crate::config::{Cli, RunConfig};

/// Failures that end a run, each with its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Library(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Library(e) => match e {
                Error::SolverFailure(_)
                | Error::NonConvergence { .. }
                | Error::NumericalFailure(_)
                | Error::DominationViolated { .. } => 3,
                Error::DimensionMismatch { .. }
                | Error::ShapeMismatch { .. }
                | Error::InvalidState(_)
                | Error::InvalidParameter(_)
                | Error::DimensionBlowup { .. }
                | Error::Parse(_) => 2,
            },
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("ONESHOT_RSP_LOG", "error");
    env_logger::Builder::from_env(env).format_timestamp(None).init();
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let config = RunConfig::resolve(cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let outcome = commands::run(&config)?;
    let text = output::render(&config, &outcome)?;
    output::emit(&config, &text)?;
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("one or more assertions in the report failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
