use std::path::PathBuf;

use thermal_designs::Error as CoreError;
use thiserror::Error;

/// Process exit codes; a stable contract for scripts.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const CAPACITY: u8 = 3;
    pub const NUMERIC: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("self-test failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Parse { .. } => exit::CONFIG,
            CliError::Check(_) => exit::NUMERIC,
            CliError::Core(e) => match e {
                CoreError::Capacity { .. } => exit::CAPACITY,
                CoreError::NumericFailure { .. }
                | CoreError::DegenerateFit(_)
                | CoreError::Unreachable { .. }
                | CoreError::MissingPurities(_) => exit::NUMERIC,
                _ => exit::CONFIG,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
