use thiserror::Error;

/// Errors raised by the EVaR library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvarError {
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("derivative is singular at x = {0}")]
    Singularity(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("minimizer failed to converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, EvarError>;
