use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("sampling period must be positive and finite, got {0}")]
    NonPositivePeriod(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigenvalue iteration did not converge ({0})")]
    ConvergenceFailure(String),

    #[error("Jordan structure is numerically ambiguous (transform condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("top vector is not a left eigenvector (relative residual {residual:.3e})")]
    NotAnEigenvector { residual: f64 },

    #[error("{0} is not an eigenvalue of any subsystem")]
    UnknownEigenvalue(String),

    #[error("criterion not applicable: {0}")]
    NotApplicable(String),

    #[error("cycle weight {index} is zero")]
    ZeroWeight { index: usize },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
