//! Flat tori: the degenerate reference geometry.
//!
//! Closed Reeb orbits on a flat `n`-torus come in one Morse-Bott component
//! per nonzero lattice vector `v`, of period `|v|`, so counting components
//! is exact lattice-point counting and grows like `T^n`.  A small generic
//! perturbation splits each component into finitely many nondegenerate
//! orbits, at least `2^{n-1}` of them, which is what separates polynomial
//! models from the exponential Anosov ones on the growth side.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Cap on materialized lattice vectors.
pub const COMPONENT_CAP: u128 = 10_000_000;

/// Largest torus dimension accepted; counts beyond this overflow any
/// practical use.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatTorusModel {
    n: usize,
}

impl FlatTorusModel {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation(format!(
                "flat torus dimension must be at least 2, got {n}"
            )));
        }
        if n > MAX_DIM {
            return Err(Error::Validation(format!(
                "flat torus dimension {n} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        Ok(FlatTorusModel { n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of nonzero lattice vectors with `|v| <= t`, exact.
    ///
    /// Counted by recursion over coordinates without materializing vectors,
    /// so grids up to large `t` stay cheap.
    pub fn component_count(&self, t: f64) -> Result<BigUint> {
        self.check_t(t)?;
        if t < 1.0 {
            return Ok(BigUint::zero());
        }
        let total = count_in_ball(self.n, t * t);
        Ok(BigUint::from(total - 1))
    }

    /// The lattice vectors themselves, in lexicographic order.
    pub fn components(&self, t: f64) -> Result<Vec<Vec<i64>>> {
        self.check_t(t)?;
        let count = count_in_ball(self.n, t * t) - 1;
        if count > COMPONENT_CAP {
            return Err(Error::EnumerationCap {
                needed: count,
                cap: COMPONENT_CAP,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut prefix = vec![0i64; self.n];
        enumerate_rec(self.n, t * t, &mut prefix, 0, &mut out);
        Ok(out)
    }

    /// Nondegenerate orbit count after a generic perturbation splitting
    /// every component into `crit_count` orbits.
    ///
    /// A function on an `(n-1)`-torus of critical manifolds has at least
    /// `2^{n-1}` critical points, so smaller counts are rejected.
    pub fn perturbed_count(&self, t: f64, crit_count: u64) -> Result<BigUint> {
        let floor = 1u64 << (self.n - 1);
        if crit_count < floor {
            return Err(Error::Validation(format!(
                "a perturbation of the {}-torus splits each component into at \
                 least {floor} orbits, got {crit_count}",
                self.n
            )));
        }
        Ok(self.component_count(t)? * BigUint::from(crit_count))
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::BadArgument(format!(
                "period bound must be finite and nonnegative, got {t}"
            )));
        }
        Ok(())
    }
}

/// Integer points of the closed n-ball of squared radius `r2` (including 0).
fn count_in_ball(dims: usize, r2: f64) -> u128 {
    if dims == 0 {
        return 1;
    }
    let bound = r2.sqrt().floor() as i64;
    let mut total = 0u128;
    for x in -bound..=bound {
        let rem = r2 - (x * x) as f64;
        if rem < 0.0 {
            continue;
        }
        total += count_in_ball(dims - 1, rem);
    }
    total
}

fn enumerate_rec(dims: usize, r2: f64, prefix: &mut Vec<i64>, depth: usize, out: &mut Vec<Vec<i64>>) {
    if depth == dims {
        if prefix.iter().any(|&x| x != 0) {
            out.push(prefix.clone());
        }
        return;
    }
    let bound = r2.sqrt().floor() as i64;
    for x in -bound..=bound {
        let rem = r2 - (x * x) as f64;
        if rem < 0.0 {
            continue;
        }
        prefix[depth] = x;
        enumerate_rec(dims, rem, prefix, depth + 1, out);
    }
    prefix[depth] = 0;
}
