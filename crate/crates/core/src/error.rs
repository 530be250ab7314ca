use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input configuration. `pointer` is a JSON pointer to the offending field.
    #[error("invalid configuration at {pointer}: {message}")]
    InvalidConfig { pointer: String, message: String },

    /// A kernel was evaluated at one of its singular points.
    #[error("singular point: {0}")]
    Singularity(String),

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    /// A pivot fell below the singularity threshold during a linear solve.
    #[error("singular matrix: pivot {pivot} has magnitude {magnitude:.3e}")]
    SingularMatrix { pivot: usize, magnitude: f64 },

    /// The characteristic matrix is singular at the requested spectral parameter.
    #[error("pole of the resolvent at z = {0}")]
    Pole(Complex64),

    /// The integration contour passes through (or too close to) a zero of det Γ.
    #[error("contour touches a zero of det Γ: {0}")]
    BoundarySingularity(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
