use std::io;

use qgibbs::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// 2 for config and usage errors, 3 for capacity, 4 for numerical
    /// accuracy, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io { .. } => 1,
        }
    }
}

pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Capacity { .. } => 3,
        CoreError::Accuracy { .. }
        | CoreError::Solver { .. }
        | CoreError::DetailedBalance { .. }
        | CoreError::Stall { .. } => 4,
        CoreError::InvalidSize { .. } | CoreError::InvalidGraph(_) | CoreError::Domain(_) | CoreError::Parse { .. } => 2,
    }
}
