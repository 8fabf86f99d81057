use thiserror::Error;

use crate::preconditioners::PrecKind;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation {distance:e} rad from a removable pole (guard {guard:e})")]
    Singularity { distance: f64, guard: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {error_estimate:e} after {intervals} intervals")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        error_estimate: f64,
        intervals: usize,
    },

    #[error("Fourier coefficients did not stabilize after {doublings} doublings (last change {change:e})")]
    NotStabilized { doublings: u32, change: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{kind} preconditioner is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd { kind: PrecKind, min_eigenvalue: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("CG breakdown at iteration {iteration}: inner product {value:e}")]
    Breakdown { iteration: usize, value: f64 },

    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("eigenvalue iteration did not converge for index {index}")]
    EigenNonConvergence { index: usize },

    #[error("invalid size {n}: {reason}")]
    InvalidSize { n: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
