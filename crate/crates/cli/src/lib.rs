//! Command-line front end for `dualwave-core`: config parsing, experiment
//! orchestration, CSV/JSON emission and the verification suites.

pub mod commands;
pub mod config;
pub mod output;
pub mod suites;

use std::ffi::OsString;

use clap::Parser;
use serde::Serialize;

pub use commands::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numeric(String),
    /// The solver refused to run for the requested regime.
    Refused(String),
    /// A verification suite ran to completion and failed.
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::CheckFailed(_) => EXIT_NUMERIC,
            CliError::Refused(_) => EXIT_REFUSED,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Refused(_) => "refused",
            CliError::CheckFailed(_) => "check_failed",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Refused(m) | CliError::CheckFailed(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl From<dualwave_core::Error> for CliError {
    fn from(e: dualwave_core::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("i/o error: {e}"))
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: &'a str,
    exit_code: i32,
}

fn report_error(e: &CliError) {
    let report = ErrorReport { error: e.kind(), message: e.message(), exit_code: e.exit_code() };
    let line = output::to_json_line(&report).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", e.kind()));
    eprintln!("{line}");
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DUALWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DUALWAVE_THREADS: expected a positive integer, got {raw:?}")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim_end().to_string());
            report_error(&err);
            return err.exit_code();
        }
    };
    match configure_threads().and_then(|_| commands::dispatch(cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}
