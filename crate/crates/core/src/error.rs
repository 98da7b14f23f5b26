//! Error type shared across the crate.

/// Errors produced by construction, synthesis, simulation and analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("not a valid density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("channel is not CPTP: {reason}")]
    NotCptp { reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
