use thiserror::Error;

/// Errors raised by the library. `exit_code` maps them onto the CLI
/// convention (2 for usage/config problems, 3 for numerical failures).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not a torus automorphism: determinant {0}")]
    NotUnimodular(i64),

    #[error("linear part is not hyperbolic: eigenvalue modulus {modulus} is within {tol} of 1")]
    NotHyperbolic { modulus: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error(
        "Newton inverse did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NewtonDivergence { .. } | Error::Numerical(_) | Error::EmptySample(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
