//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numeric, geometric and statistical layers.
#[derive(Error, Debug)]
pub enum CoreError {
    /// A matrix had the wrong shape for the requested operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// An input that must be Hermitian positive definite was not.
    #[error("{context}: matrix is not positive definite (smallest eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { context: &'static str, min_eig: f64 },

    /// A factorization met a numerically singular matrix.
    #[error("{context}: matrix is singular to working precision (min/max singular value {ratio:.3e}); try a smaller step")]
    Singular { context: &'static str, ratio: f64 },

    /// A tangent vector violated the horizontality condition beyond tolerance.
    #[error("tangent vector is not horizontal (residual {residual:.3e} > tol {tol:.3e}); project it first")]
    NotHorizontal { residual: f64, tol: f64 },

    /// Two subspaces are too close to orthogonal for the divergence to be
    /// meaningful.
    #[error("subspace alignment degenerate: largest principal angle {angle:.6} is within {margin:.1e} of pi/2")]
    DegenerateAlignment { angle: f64, margin: f64 },

    /// A structural property promised by the theory failed numerically.
    #[error("structural assertion failed: {0}")]
    Structural(String),

    /// Armijo backtracking could not find sufficient decrease.
    #[error("line search failed to find sufficient decrease within {backtracks} backtracks")]
    LineSearchFailure { backtracks: usize },

    /// A user-supplied parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Malformed input data (CSV parsing and friends).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
