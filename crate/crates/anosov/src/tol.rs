//! Default numeric tolerances.
//!
//! Every tolerance used by a validating constructor lives here, so tests and
//! the command line can override them in one place.  Absolute tolerances are
//! meant for O(1) matrices; routines that handle large iterates switch to
//! exact integer arithmetic instead of loosening these.

/// Max-norm defect allowed in `M^T J M - J` for a matrix accepted as symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// Relative deviation of `det M` from 1 allowed for a symplectic matrix.
pub const DET_ONE_TOL: f64 = 1e-8;

/// Max-norm defect allowed in `F^T J F` for a frame accepted as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-9;

/// Relative rank cutoff for frames: smallest singular value must exceed
/// this multiple of the largest.
pub const FRAME_RANK_TOL: f64 = 1e-9;

/// Frames with condition number above this are rejected as numerically rank
/// deficient before any further use.
pub const FRAME_CONDITION_LIMIT: f64 = 1e8;

/// Max-norm defect allowed when checking that a subspace is invariant, and in
/// the block identities `C = (A^T)^{-1}` and `A^{-1} B` symmetric.
pub const BLOCK_TOL: f64 = 1e-8;

/// Return maps with `|det(I - P)|` at or below this are treated as degenerate.
pub const DEGENERACY_CUTOFF: f64 = 1e-10;

/// Tolerance bundle threaded through the symplectic validators.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub symplectic: f64,
    pub det_one: f64,
    pub isotropy: f64,
    pub frame_rank: f64,
    pub frame_condition_limit: f64,
    pub block: f64,
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symplectic: SYMPLECTIC_TOL,
            det_one: DET_ONE_TOL,
            isotropy: ISOTROPY_TOL,
            frame_rank: FRAME_RANK_TOL,
            frame_condition_limit: FRAME_CONDITION_LIMIT,
            block: BLOCK_TOL,
            degeneracy: DEGENERACY_CUTOFF,
        }
    }
}
