//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FvError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hilbert dimension {dim} exceeds configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("inconsistent syndrome sector: {0}")]
    InconsistentSector(String),

    #[error("degenerate cancellation in mixture action: |sum p_a exp(i phi_a)| = {magnitude:.3e}")]
    DegenerateCancellation { magnitude: f64 },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T, E = FvError> = std::result::Result<T, E>;
