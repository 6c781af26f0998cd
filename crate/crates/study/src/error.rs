use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = StudyError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{path}: content hash mismatch")]
    HashMismatch { path: PathBuf },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solver failed for mu = {mu}")]
    Solver {
        mu: f64,
        #[source]
        source: frozenrb_core::Error,
    },
    #[error(transparent)]
    Core(#[from] frozenrb_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) trait IoContext<T> {
    fn at(self, path: &std::path::Path) -> Result<T>;
}

impl<T> IoContext<T> for std::result::Result<T, std::io::Error> {
    fn at(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|source| StudyError::Io { path: path.to_path_buf(), source })
    }
}
