//! CLI error type with the exit-status convention.

use std::path::PathBuf;

use thiserror::Error;

/// Command failures, grouped by exit status: I/O (1), validation (2),
/// configuration coverage (3).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
    #[error("no cost rate covers product `{0}`; add it to the costs document")]
    Coverage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Coverage(_) => 3,
        }
    }
}

impl From<opeff_core::Error> for CliError {
    fn from(err: opeff_core::Error) -> Self {
        match err {
            opeff_core::Error::MissingCostRate { product_id } => CliError::Coverage(product_id),
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
