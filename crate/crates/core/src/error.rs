use thiserror::Error;

/// Errors raised by the library.
///
/// Mathematical rejection of a candidate automorphism is reported through
/// [`crate::automorphism::AutCheckResult`], not through this type. The
/// variants here cover malformed input and contract violations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension must be at least {min}, got {actual}")]
    DimensionTooSmall { min: usize, actual: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("ragged rows: row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not an automorphism of the Lorentz cone: {reason}")]
    NotAutomorphism { reason: String },

    #[error("matrix is not orthogonal: residual {residual:.3e} exceeds {bound:.3e}")]
    NotOrthogonal { residual: f64, bound: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
