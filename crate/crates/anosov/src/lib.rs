//! Periodic-orbit censuses, index parity bookkeeping, and growth
//! diagnostics for Anosov Reeb flows.
//!
//! The crate is organized as a pipeline:
//!
//! * [`symplectic`]: symplectic linear algebra, Lagrangian frames, block
//!   forms adapted to invariant subspaces, and the determinant-sign parity
//!   of return maps;
//! * [`cz`]: Conley-Zehnder indices of symplectic paths by crossing
//!   counting, with the parity cross-check;
//! * [`bundles`]: unstable Lagrangian bundles of hyperbolic cocycles,
//!   holonomy signs, and the parity equivalence;
//! * [`models`]: toral suspensions, flat tori, and irrational ellipsoids,
//!   each with an exactly enumerable census;
//! * [`census`]: orbit records, good/bad classification, and the census
//!   file format;
//! * [`growth`]: entropy and polynomial growth estimators, the scaling
//!   identity, and the roof-function squeeze;
//! * [`homology`]: rank pages, the degeneration check, and the ball and
//!   bounded-rank obstruction analyzers;
//! * [`verify`]: seeded random corpora and pass/fail suites for the
//!   structural identities above.

pub mod bundles;
pub mod census;
pub mod cz;
pub mod error;
pub mod growth;
pub mod homology;
pub mod models;
pub mod symplectic;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};

// Compile the book's code samples as documentation tests, so the chapters
// cannot drift from the crate they describe.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/symplectic-parity.md")]
    mod symplectic_parity {}
    #[doc = include_str!("../../../book/src/conley-zehnder.md")]
    mod conley_zehnder {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/bundles.md")]
    mod bundles {}
    #[doc = include_str!("../../../book/src/census-growth.md")]
    mod census_growth {}
    #[doc = include_str!("../../../book/src/homology.md")]
    mod homology {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
