use std::path::PathBuf;

use ddp_core::DdpError;
use thiserror::Error;

/// Failures surfaced by the command-line front end, one exit code each.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub const EXIT_CHECKS: i32 = 1;
    pub const EXIT_CONFIG: i32 = 3;
    pub const EXIT_DATA: i32 = 4;
    pub const EXIT_NUMERIC: i32 = 5;
    pub const EXIT_IO: i32 = 6;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => Self::EXIT_CONFIG,
            CliError::Data(_) => Self::EXIT_DATA,
            CliError::Numeric(_) => Self::EXIT_NUMERIC,
            CliError::Io { .. } => Self::EXIT_IO,
            CliError::ChecksFailed(_) => Self::EXIT_CHECKS,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Model-construction errors are configuration problems unless they are
    /// numeric by nature.
    pub(crate) fn from_model(e: DdpError) -> Self {
        match e {
            DdpError::Numeric(m) => CliError::Numeric(m),
            other => CliError::Config(other.to_string()),
        }
    }

    pub(crate) fn from_data(e: DdpError) -> Self {
        match e {
            DdpError::Numeric(m) => CliError::Numeric(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
