use num_complex::Complex64;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("exponent p = {0} is outside the admissible range")]
    InvalidExponent(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("lambda = {lambda} lies in the spectrum (nearest eigenvalue {eigenvalue})")]
    Singular { lambda: Complex64, eigenvalue: Complex64 },

    #[error("spectral condition violated: {0}")]
    Spectrum(String),

    #[error("eigenvector matrix is too ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
