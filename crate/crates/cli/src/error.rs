use std::path::PathBuf;

use thiserror::Error;
use urban_coverage::CoverageError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable inputs or invalid configuration.
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Simulation(#[from] CoverageError),
    #[error("incompatible runs in group {group}: {reason}")]
    Incompatible { group: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
