use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid scenario: {0}")]
    Invalid(String),

    #[error("{field}: {source}")]
    Field {
        field: &'static str,
        source: lockdown_core::Error,
    },

    #[error(transparent)]
    Core(#[from] lockdown_core::Error),

    #[error("plotting failed: {0}")]
    Plot(String),
}

impl CliError {
    /// Process exit code: 2 for unusable input, 3 for numerical failures,
    /// 1 for output problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Invalid(_) | CliError::Field { .. } => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(lockdown_core::Error::NoOutbreak { .. }) => 2,
            CliError::Core(_) => 3,
            CliError::Write { .. } | CliError::Plot(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
