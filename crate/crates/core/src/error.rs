use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no {d}-regular graph on {n} vertices: n*d must be even")]
    Parity { n: usize, d: usize },

    #[error("pairing model produced no simple graph after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("matrix is not symmetric (max |A - A^T| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has empty support")]
    EmptySupport,

    #[error("integration produced a non-finite amplitude at step {step}")]
    Integration { step: usize },

    #[error("spectral condition violated: c = {c} is not below 1")]
    ConditionViolated { c: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
