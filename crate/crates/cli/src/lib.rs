//! Driver for generating field files, running functional sweeps, inequality
//! suites and covering estimates, and writing JSON-lines and CSV reports.

pub mod commands;
pub mod config;
pub mod fieldio;
pub mod report;

pub use commands::{cmd_analyze, cmd_cover, cmd_generate, cmd_verify, FieldInput};
pub use config::RunConfig;

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0:#}")]
    Io(anyhow::Error),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Assertion(_) => 3,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.into())
    }
}
