//! Irrational ellipsoids: the convex counterpoint to the Anosov models.
//!
//! `E(a, b)` with `a/b` irrational carries exactly two simple closed Reeb
//! orbits, one along each axis, with periods `a` and `b`.  Every iterate is
//! nondegenerate elliptic; the k-th iterate of the period-`a` orbit rotates
//! transversally by `k a / b` turns, and its index in the disk-bounding
//! frame is
//!
//! ```text
//!     2 (k + floor(k a / b)) + 1,
//! ```
//!
//! always odd.  The census computes the rotation part with the crossing-form
//! engine and adds the frame correction `2k`, so the closed formula stays
//! available as an independent oracle.
//!
//! The two interleaved floor sequences are complementary Beatty sequences:
//! together the indices hit every odd integer `>= 3` exactly once, which is
//! what the sphere-shaped homology expects.

use num_bigint::BigUint;

use crate::census::{CensusTable, Grading, OrbitRecord, OrbitType};
use crate::cz::{cz_index, SymplecticPath};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::symplectic::Parity;

/// Denominator bound for the irrationality guard.
pub const GUARD_MAX_DEN: i64 = 1_000_000;

/// A ratio closer than this to a fraction with denominator within
/// [`GUARD_MAX_DEN`], measured by `|q r - p|`, is treated as rational.
pub const GUARD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidModel {
    a: f64,
    b: f64,
}

impl EllipsoidModel {
    /// Validate `0 < a < b` and reject numerically rational ratios.
    ///
    /// The guard walks the continued-fraction convergents `p/q` of `a/b` up
    /// to `q = 10^6` and fails when `|q (a/b) - p| < 1e-12`.  Any fraction
    /// that close with a denominator in range is itself a convergent, so
    /// checking convergents is exhaustive.  Quadratic irrationals such as
    /// `sqrt 2` pass with orders of magnitude to spare.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Validation(format!(
                "ellipsoid axes must be positive and finite, got a = {a}, b = {b}"
            )));
        }
        if !(a < b) {
            return Err(Error::Validation(format!(
                "ellipsoid axes must satisfy a < b, got a = {a}, b = {b}"
            )));
        }
        let r = a / b;
        if let Some((p, q)) = nearby_fraction(r) {
            return Err(Error::Validation(format!(
                "axis ratio {r} is within {GUARD_TOL:.0e} of {p}/{q}; \
                 ellipsoid censuses need an irrational ratio"
            )));
        }
        Ok(EllipsoidModel { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `P_T`: iterates of the two orbits with period at most `t`.
    pub fn pair_count(&self, t: f64) -> Result<BigUint> {
        self.check_t(t)?;
        let slack = 1e-9 * t.max(1.0);
        let ka = ((t + slack) / self.a).floor().max(0.0) as u64;
        let kb = ((t + slack) / self.b).floor().max(0.0) as u64;
        Ok(BigUint::from(ka) + BigUint::from(kb))
    }

    /// Index of the k-th iterate of one axis orbit whose transversal
    /// rotation ratio is `ratio`, via the crossing-form engine plus the
    /// disk-frame correction `2k`.
    fn iterate_index(ratio: f64, k: u32) -> Result<i64> {
        let path = SymplecticPath::rotation(k as f64 * ratio)?;
        Ok(cz_index(&path)?.index + 2 * k as i64)
    }

    /// Integer-graded census of both axis families up to period `t`.
    pub fn census(&self, t: f64) -> Result<CensusTable> {
        self.check_t(t)?;
        let slack = 1e-9 * t.max(1.0);
        let mut records = Vec::new();
        let families: [(&str, f64, f64); 2] = [
            ("axis-a", self.a, self.a / self.b),
            ("axis-b", self.b, self.b / self.a),
        ];
        for (id, period, ratio) in families {
            let mut k = 1u32;
            while k as f64 * period <= t + slack {
                let index = Self::iterate_index(ratio, k)?;
                records.push(OrbitRecord {
                    simple_id: id.to_string(),
                    iterate: k,
                    period: k as f64 * period,
                    class_label: 0,
                    cz_parity: Parity::of(index),
                    cz_index: Some(index),
                    good: true,
                    orbit_type: OrbitType::Elliptic,
                    holonomy_sign: None,
                });
                k += 1;
            }
        }
        CensusTable::new(
            ModelSpec::Ellipsoid {
                a: self.a,
                b: self.b,
            },
            t,
            Grading::Integer,
            records,
        )
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

/// The fraction `p/q`, `q <= GUARD_MAX_DEN`, with `|q r - p| < GUARD_TOL`,
/// if one exists.
fn nearby_fraction(r: f64) -> Option<(i64, i64)> {
    // Continued-fraction convergents of r.
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let (mut p, mut q) = (r.floor() as i64, 1i64);
    let mut x = r;
    loop {
        if (q as f64 * r - p as f64).abs() < GUARD_TOL {
            return Some((p, q));
        }
        let frac = x - x.floor();
        if frac < 1e-15 {
            // The expansion terminated: r is a float-exact rational, and the
            // convergent test above already ruled on it.
            return None;
        }
        x = 1.0 / frac;
        let digit = x.floor() as i64;
        let (p_next, q_next) = match (
            digit.checked_mul(p).and_then(|v| v.checked_add(p_prev)),
            digit.checked_mul(q).and_then(|v| v.checked_add(q_prev)),
        ) {
            (Some(pn), Some(qn)) => (pn, qn),
            _ => return None,
        };
        if q_next > GUARD_MAX_DEN {
            return None;
        }
        (p_prev, q_prev) = (p, q);
        (p, q) = (p_next, q_next);
    }
}
