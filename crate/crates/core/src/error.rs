//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFiniteEntry,

    #[error("matrix is not Hermitian: max |M - M†| entry = {max_asymmetry:.3e} (tolerance {tolerance:.3e})")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("operator does not have unit trace: |Tr - 1| = {trace_error:.3e}")]
    NotUnitTrace { trace_error: f64 },

    #[error("invalid projective measurement: {0}")]
    InvalidMeasurement(String),

    #[error("map is not trace preserving: residual {residual:.3e}")]
    NotTracePreserving { residual: f64 },

    #[error("map is not completely positive: min Choi eigenvalue {min_choi_eigenvalue:.3e}")]
    NotCompletelyPositive { min_choi_eigenvalue: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps: off-diagonal max {off_norm:.3e}")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("imaginary residue {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ImaginaryResidueExceeded { residual: f64, tolerance: f64 },

    #[error("anticommutator equation has no solution: kernel obstruction at eigenbasis blocks {offending_blocks:?}")]
    NoSolution {
        offending_blocks: Vec<(usize, usize)>,
        residual: f64,
    },

    #[error("tomographic frame is ill-conditioned: smallest singular value {smallest_singular_value:.3e}")]
    IllConditionedFrame { smallest_singular_value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid outcome partition: {0}")]
    InvalidPartition(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}
