//! Library half of the command-line runner. Each subcommand is an ordinary
//! function so integration tests can call them without spawning processes.

pub mod commands;
pub mod prepare;
pub mod report;

use thiserror::Error;

/// Failures classified by exit code: usage/validation problems exit 2,
/// numerical problems (non-finite values, singular systems, failed
/// self-checks) exit 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

/// I/O and validation-stage errors are usage errors; anything numerical is
/// mapped explicitly at the call sites.
pub fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}
