use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// The variants split into three families that the command-line driver maps
/// onto exit codes: input validation, numerical accuracy, and I/O.
#[derive(Debug, Error)]
pub enum SpeclabError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numerical accuracy failure: {0}")]
    Accuracy(String),

    #[error("block {index} is singular at the requested spectral parameter")]
    SingularBlock { index: i64 },

    #[error("point lies on the symbol curve (distance {distance:.3e} <= tolerance {tolerance:.3e})")]
    OnCurve { distance: f64, tolerance: f64 },

    #[error("point lies outside the constant-resolvent-norm region: {0}")]
    OutOfRegion(String),

    #[error("Hausdorff distance undefined for an empty point set")]
    EmptySet,

    #[error("grid resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl SpeclabError {
    /// True for errors caused by bad user input rather than numerics or I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SpeclabError::Dimension(_)
                | SpeclabError::Validation(_)
                | SpeclabError::OutOfRegion(_)
                | SpeclabError::EmptySet
                | SpeclabError::Json(_)
        )
    }

    /// True for errors that signal the numerics could not reach the requested accuracy.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SpeclabError::Accuracy(_)
                | SpeclabError::SingularBlock { .. }
                | SpeclabError::OnCurve { .. }
                | SpeclabError::ResolutionTooCoarse(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SpeclabError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = SpeclabError> = std::result::Result<T, E>;
