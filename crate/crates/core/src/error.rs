use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown field spec `{0}`")]
    UnknownField(String),

    #[error("discriminant {discriminant} is not positive beyond the margin")]
    DiscriminantNotPositive { discriminant: f64 },

    #[error("query point lies on the graph (distance {value})")]
    OnGraph { value: f64 },

    #[error("ambiguous projection: several nearest feet, gradient undefined")]
    AmbiguousProjection,

    #[error("{what} did not converge (residual {residual:e} after {iterations} iterations)")]
    NonConvergence {
        what: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate domain: extent {extent} below {min}")]
    DegenerateDomain { extent: f64, min: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
