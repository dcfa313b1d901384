use std::path::PathBuf;

use anafft_core::Error as CoreError;

/// Failures of the command-line layer, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), msg: msg.into() }
    }

    /// 2 for configuration problems, 3 for sizes the arrays cannot factor,
    /// 4 for file errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(CoreError::Model(_)) => 2,
            CliError::Core(CoreError::Unfactorable { .. } | CoreError::MissingArray(_) | CoreError::InvalidFactors(_)) => 3,
            CliError::Core(_) => 1,
            CliError::Io { .. } | CliError::Format { .. } => 4,
        }
    }
}
