use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SurfnetError>;

#[derive(Error, Debug)]
pub enum SurfnetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("input parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl SurfnetError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SurfnetError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            SurfnetError::Io { .. } | SurfnetError::Parse(_) => 2,
            SurfnetError::Config(_) | SurfnetError::InvalidInput(_) => 3,
            SurfnetError::Internal(_) => 4,
        }
    }
}
