use std::path::PathBuf;

use fracwave_core::FracError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no reference solution for case {0}")]
    NoReference(String),

    #[error("report serialization failed: {0}")]
    Serialize(String),

    #[error(transparent)]
    Core(#[from] FracError),
}

impl HarnessError {
    /// Process exit status: 2 for usage and I/O problems, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
