use thiserror::Error;

/// Errors shared across the crate.
///
/// Numeric validation failures carry the measured defect so callers can tell
/// a near-miss from garbage input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("expected an even-dimensional square matrix, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symplectic: defect {defect:.3e} exceeds {tol:.3e}")]
    NotSymplectic { defect: f64, tol: f64 },

    #[error("frame is not isotropic: defect {defect:.3e} exceeds {tol:.3e}")]
    NotIsotropic { defect: f64, tol: f64 },

    #[error("subspace is not invariant: defect {defect:.3e} exceeds {tol:.3e}")]
    NotInvariant { defect: f64, tol: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("degenerate return map: |det(I - P)| = {0:.3e}")]
    Degenerate(f64),

    #[error("crossing at t = {t} is not regular: {why}")]
    IrregularCrossing { t: f64, why: String },

    #[error("cocycle is not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("enumeration would visit {needed} periodic points, cap is {cap}")]
    EnumerationCap { needed: u128, cap: u128 },

    #[error("invalid argument: {0}")]
    BadArgument(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
