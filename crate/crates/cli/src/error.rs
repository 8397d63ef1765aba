use std::path::PathBuf;

use shearlab::ShearError;
use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: u8 = 0;
/// Exit status for I/O and other runtime failures.
pub const EXIT_FAILURE: u8 = 1;
/// Exit status for malformed configs and invalid parameters.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status for numerical convergence failures.
pub const EXIT_CONVERGENCE: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Shear(#[from] ShearError),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_VALIDATION,
            CliError::Shear(ShearError::QuadratureNotConverged { .. }) => EXIT_CONVERGENCE,
            CliError::Shear(_) => EXIT_VALIDATION,
            CliError::Io { .. } | CliError::ThreadPool(_) => EXIT_FAILURE,
        }
    }
}
