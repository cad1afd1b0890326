use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tdaband::Error),

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: tdaband::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 for bad flags or configuration, 3 for solver failures, 4 for
    /// unreadable or unwritable files.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(tdaband::Error::Io(_)) => 4,
            CliError::Core(_) | CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Input { .. } | CliError::Json(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
