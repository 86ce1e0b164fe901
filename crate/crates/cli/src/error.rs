use std::path::PathBuf;

use speclab_core::SpeclabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] SpeclabError),

    #[error("{0}")]
    Usage(String),

    #[error("config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),

    #[error("writing output: {0}")]
    Stdout(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 when the numerics could not meet their accuracy
    /// target, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Usage(_) | CliError::ConfigParse { .. } => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
