//! Shared input handling and the CLI error type.

use std::fmt;
use std::fs;
use std::io::Read;

use blt_core::blt::BltParams;

/// Errors surfaced by the commands; the exit-code mapping lives in `main`.
#[derive(Debug)]
pub enum CliError {
    /// Reading the input failed.
    Io(std::io::Error),
    /// The input was not valid parameter JSON.
    Parse(String),
    /// A flag value could not be interpreted.
    Usage(String),
    /// A requested check did not hold.
    Verification(String),
    /// A library call failed.
    Core(blt_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Parse(e) => write!(f, "invalid input: {e}"),
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Verification(e) => write!(f, "verification failed: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<blt_core::Error> for CliError {
    fn from(e: blt_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Reads a whole input, with `-` meaning stdin.
pub fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

/// Reads and parses parameter JSON from a file or stdin.
pub fn read_params(path: &str) -> Result<BltParams, CliError> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))
}

/// Dense-size cap, overridable through `BLT_MAX_DENSE_N`.
pub fn dense_cap() -> usize {
    std::env::var("BLT_MAX_DENSE_N")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(blt_core::blt::DEFAULT_DENSE_CAP)
}

/// Output format for tabular payloads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}
