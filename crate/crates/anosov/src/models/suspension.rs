//! Suspensions of hyperbolic toral automorphisms.
//!
//! A matrix `A` in `SL(2, Z)` with `|tr A| >= 3` acts on the torus with
//! isolated periodic points; suspending under a positive roof turns each
//! orbit of the map into a closed orbit of the flow whose period is the
//! Birkhoff sum of the roof.  Everything here is exact integer arithmetic
//! until the final Birkhoff sums:
//!
//! * `Fix(A^k)` has exactly `|tr(A^k) - 2|` points, with `tr(A^k)` from the
//!   Chebyshev-style recurrence `t_k = t t_{k-1} - t_{k-2}`;
//! * the points themselves come from the Smith normal form of `A^k - I`;
//! * index parity and holonomy sign of an iterate depend only on the sign
//!   of `tr(A^{k m})`, so they are computed from integer traces rather than
//!   floating-point products of return maps, which lose symplecticity after
//!   a handful of factors.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::census::{CensusTable, Grading, OrbitRecord, OrbitType};
use crate::error::{Error, Result};
use crate::models::{ModelSpec, Roof};
use crate::symplectic::Parity;

/// Hard cap on enumerated periodic points.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// An exact rational point on the 2-torus, componentwise `num/den` reduced
/// with `0 <= num < den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    pub num: [i64; 2],
    pub den: [i64; 2],
}

impl TorusPoint {
    pub fn new(num: [i64; 2], den: [i64; 2]) -> Result<Self> {
        if den[0] <= 0 || den[1] <= 0 {
            return Err(Error::BadArgument(
                "torus point denominators must be positive".into(),
            ));
        }
        Ok(Self::reduced([num[0] as i128, num[1] as i128], [
            den[0] as i128,
            den[1] as i128,
        ]))
    }

    fn reduced(num: [i128; 2], den: [i128; 2]) -> Self {
        let mut out = TorusPoint {
            num: [0; 2],
            den: [1; 2],
        };
        for c in 0..2 {
            let d = den[c];
            let n = num[c].rem_euclid(d);
            let g = n.gcd(&d);
            out.num[c] = (n / g) as i64;
            out.den[c] = (d / g) as i64;
        }
        out
    }

    /// The image under an integer matrix, exactly.
    pub fn apply(&self, a: [[i64; 2]; 2]) -> TorusPoint {
        let (p0, p1) = (self.num[0] as i128, self.num[1] as i128);
        let (q0, q1) = (self.den[0] as i128, self.den[1] as i128);
        let d = q0 * q1;
        let n0 = a[0][0] as i128 * p0 * q1 + a[0][1] as i128 * p1 * q0;
        let n1 = a[1][0] as i128 * p0 * q1 + a[1][1] as i128 * p1 * q0;
        Self::reduced([n0, n1], [d, d])
    }

    pub fn as_floats(&self) -> [f64; 2] {
        [
            self.num[0] as f64 / self.den[0] as f64,
            self.num[1] as f64 / self.den[1] as f64,
        ]
    }
}

impl std::fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{},{}/{}",
            self.num[0], self.den[0], self.num[1], self.den[1]
        )
    }
}

impl Ord for TorusPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for c in 0..2 {
            let lhs = self.num[c] as i128 * other.den[c] as i128;
            let rhs = other.num[c] as i128 * self.den[c] as i128;
            match lhs.cmp(&rhs) {
                std::cmp::Ordering::Equal => {}
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl PartialOrd for TorusPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A simple periodic orbit of the base map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapOrbit {
    /// Smallest point of the orbit in lexicographic fraction order.
    pub representative: TorusPoint,
    pub least_period: u32,
    /// Degree in the mapping-torus first homology, equal to the least period.
    pub homology_class: i64,
}

fn mat_pow(a: [[i64; 2]; 2], k: u32) -> [[i128; 2]; 2] {
    let mut out = [[1i128, 0], [0, 1]];
    let a = [
        [a[0][0] as i128, a[0][1] as i128],
        [a[1][0] as i128, a[1][1] as i128],
    ];
    for _ in 0..k {
        out = [
            [
                a[0][0] * out[0][0] + a[0][1] * out[1][0],
                a[0][0] * out[0][1] + a[0][1] * out[1][1],
            ],
            [
                a[1][0] * out[0][0] + a[1][1] * out[1][0],
                a[1][0] * out[0][1] + a[1][1] * out[1][1],
            ],
        ];
    }
    out
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

struct Snf2 {
    d: [i128; 2],
    /// `V^{-1}` of the decomposition `M = U D V`; solutions of
    /// `M x = 0 mod 1` are `x = V^{-1} (i/d1, j/d2)`.
    v_inv: [[i128; 2]; 2],
}

/// Smith normal form of a nonsingular 2x2 integer matrix.
fn snf2(mut m: [[i128; 2]; 2]) -> Result<Snf2> {
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] == 0 {
        return Err(Error::Singular("Smith form of a singular matrix".into()));
    }
    let mut v_inv = [[1i128, 0], [0, 1]];
    let col_op = |m: &mut [[i128; 2]; 2], v_inv: &mut [[i128; 2]; 2], e: [[i128; 2]; 2]| {
        *m = [
            [
                m[0][0] * e[0][0] + m[0][1] * e[1][0],
                m[0][0] * e[0][1] + m[0][1] * e[1][1],
            ],
            [
                m[1][0] * e[0][0] + m[1][1] * e[1][0],
                m[1][0] * e[0][1] + m[1][1] * e[1][1],
            ],
        ];
        *v_inv = [
            [
                v_inv[0][0] * e[0][0] + v_inv[0][1] * e[1][0],
                v_inv[0][0] * e[0][1] + v_inv[0][1] * e[1][1],
            ],
            [
                v_inv[1][0] * e[0][0] + v_inv[1][1] * e[1][0],
                v_inv[1][0] * e[0][1] + v_inv[1][1] * e[1][1],
            ],
        ];
    };
    loop {
        if m[1][0] != 0 {
            // Row operation: gcd of the first column into (0,0).
            let (g, x, y) = egcd(m[0][0], m[1][0]);
            let (r0, r1) = (m[0][0] / g, m[1][0] / g);
            m = [
                [g, x * m[0][1] + y * m[1][1]],
                [0, -r1 * m[0][1] + r0 * m[1][1]],
            ];
        }
        if m[0][1] == 0 {
            break;
        }
        if m[0][1] % m[0][0] == 0 {
            // Shear leaves row 1 alone, so (1,0) stays zero and the next
            // pass exits.  The egcd op below would refill it whenever its
            // second coefficient is nonzero, cycling forever on matrices
            // like [[4,4],[0,-4]].
            let q = m[0][1] / m[0][0];
            col_op(&mut m, &mut v_inv, [[1, -q], [0, 1]]);
        } else {
            // Column operation: gcd of the first row into (0,0); may refill
            // (1,0), but strictly shrinks |(0,0)|, so only finitely often.
            let (g, x, y) = egcd(m[0][0], m[0][1]);
            let (c0, c1) = (m[0][0] / g, m[0][1] / g);
            col_op(&mut m, &mut v_inv, [[x, -c1], [y, c0]]);
        }
        if m[1][0] == 0 && m[0][1] == 0 {
            break;
        }
    }
    let (d1, d2) = (m[0][0].abs(), m[1][1].abs());
    if d2 % d1 != 0 {
        // Force d1 | d2: fold column 1 into column 0 and rerun.  The new
        // (0,0) entry reduces to gcd(d1, d2) < d1, so this recursion is a
        // strictly decreasing descent.
        col_op(&mut m, &mut v_inv, [[1, 0], [1, 1]]);
        let snf = snf2(m)?;
        let w = snf.v_inv;
        return Ok(Snf2 {
            d: snf.d,
            v_inv: [
                [
                    v_inv[0][0] * w[0][0] + v_inv[0][1] * w[1][0],
                    v_inv[0][0] * w[0][1] + v_inv[0][1] * w[1][1],
                ],
                [
                    v_inv[1][0] * w[0][0] + v_inv[1][1] * w[1][0],
                    v_inv[1][0] * w[0][1] + v_inv[1][1] * w[1][1],
                ],
            ],
        });
    }
    Ok(Snf2 {
        d: [d1, d2],
        v_inv,
    })
}

/// A hyperbolic toral suspension.
#[derive(Debug, Clone, PartialEq)]
pub struct ToralSuspension {
    a: [[i64; 2]; 2],
    roof: Roof,
}

impl ToralSuspension {
    pub fn new(a: [[i64; 2]; 2], roof: Roof) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det != 1 {
            return Err(Error::Validation(format!(
                "suspension matrix must have determinant 1, got {det}"
            )));
        }
        let tr = a[0][0] + a[1][1];
        if tr.abs() < 3 {
            return Err(Error::Validation(format!(
                "suspension matrix must be hyperbolic (|trace| >= 3), got trace {tr}"
            )));
        }
        Ok(ToralSuspension { a, roof })
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.a
    }

    pub fn roof(&self) -> &Roof {
        &self.roof
    }

    pub fn trace(&self) -> i64 {
        self.a[0][0] + self.a[1][1]
    }

    /// Expanding eigenvalue magnitude `(|tr| + sqrt(tr^2 - 4)) / 2`.
    pub fn expanding_eigenvalue(&self) -> f64 {
        let t = self.trace().abs() as f64;
        (t + (t * t - 4.0).sqrt()) / 2.0
    }

    /// Topological entropy of the base map, `log` of the expanding
    /// eigenvalue.  The flow entropy lies between this divided by the roof
    /// maximum and minimum.
    pub fn map_entropy(&self) -> f64 {
        self.expanding_eigenvalue().ln()
    }

    /// `tr(A^k)` for `k = 0..=max`, exact.
    pub fn traces_up_to(&self, max: u32) -> Vec<BigInt> {
        let tr = BigInt::from(self.trace());
        let mut out = Vec::with_capacity(max as usize + 1);
        out.push(BigInt::from(2));
        if max >= 1 {
            out.push(tr.clone());
        }
        for k in 2..=max as usize {
            let next = &tr * &out[k - 1] - &out[k - 2];
            out.push(next);
        }
        out
    }

    /// `|Fix(A^k)| = |tr(A^k) - 2|`, exact.
    pub fn periodic_point_count(&self, k: u32) -> Result<BigUint> {
        if k == 0 {
            return Err(Error::BadArgument(
                "periodic point counts start at k = 1".into(),
            ));
        }
        let t = self.traces_up_to(k).pop().expect("nonempty");
        Ok((t - BigInt::from(2)).abs().to_biguint().expect("abs"))
    }

    /// Counts of simple orbits by least period, via Mobius inversion of
    /// the fixed-point counts.
    pub fn orbit_counts(&self, max_period: u32) -> Vec<BigUint> {
        let traces = self.traces_up_to(max_period);
        let fix =
            |k: u32| -> BigInt { (traces[k as usize].clone() - BigInt::from(2)).abs() };
        let mut counts: Vec<BigUint> = Vec::with_capacity(max_period as usize);
        let mut by_period: Vec<BigInt> = vec![BigInt::zero(); max_period as usize + 1];
        for m in 1..=max_period {
            let mut total = fix(m);
            for d in 1..m {
                if m % d == 0 {
                    total -= BigInt::from(d) * &by_period[d as usize];
                }
            }
            debug_assert!((&total % BigInt::from(m)).is_zero());
            let c = total / BigInt::from(m);
            by_period[m as usize] = c.clone();
            counts.push(c.to_biguint().expect("orbit counts are nonnegative"));
        }
        counts
    }

    /// Whether the k-th power of the map keeps `x` fixed on the torus.
    fn fixes(&self, pow: &[[i128; 2]; 2], x: &TorusPoint) -> bool {
        let (p0, p1) = (x.num[0] as i128, x.num[1] as i128);
        let (q0, q1) = (x.den[0] as i128, x.den[1] as i128);
        let n0 = (pow[0][0] - 1) * p0 * q1 + pow[0][1] * p1 * q0;
        let n1 = pow[1][0] * p0 * q1 + (pow[1][1] - 1) * p1 * q0;
        let d = q0 * q1;
        n0 % d == 0 && n1 % d == 0
    }

    /// All simple orbits of least period up to `max_period`, sorted by
    /// (least period, representative).
    ///
    /// Periods shard across threads; each shard solves `(A^k - I) x = 0
    /// mod 1` by Smith normal form and keeps only points whose least period
    /// is exactly `k`, so the merged result is independent of scheduling.
    pub fn enumerate_map_orbits(&self, max_period: u32) -> Result<Vec<MapOrbit>> {
        if max_period == 0 {
            return Ok(Vec::new());
        }
        let mut needed: u128 = 0;
        for k in 1..=max_period {
            let p = self.periodic_point_count(k)?;
            needed = needed.saturating_add(p.to_u128().unwrap_or(u128::MAX));
            if needed > ENUMERATION_CAP {
                return Err(Error::EnumerationCap {
                    needed,
                    cap: ENUMERATION_CAP,
                });
            }
        }
        let shards: Vec<Vec<MapOrbit>> = (1..=max_period)
            .into_par_iter()
            .map(|k| self.orbits_of_least_period(k))
            .collect::<Result<Vec<_>>>()?;
        Ok(shards.into_iter().flatten().collect())
    }

    fn orbits_of_least_period(&self, k: u32) -> Result<Vec<MapOrbit>> {
        let pow = mat_pow(self.a, k);
        let m = [
            [pow[0][0] - 1, pow[0][1]],
            [pow[1][0], pow[1][1] - 1],
        ];
        let snf = snf2(m)?;
        let [d1, d2] = snf.d;
        let l = (d1 / d1.gcd(&d2)) * d2;
        let divisor_pows: Vec<[[i128; 2]; 2]> = (1..k)
            .filter(|d| k % d == 0)
            .map(|d| mat_pow(self.a, d))
            .collect();
        let mut seen: HashSet<TorusPoint> = HashSet::new();
        let mut orbits = Vec::new();
        for i in 0..d1 {
            for j in 0..d2 {
                let y0 = i * (l / d1);
                let y1 = j * (l / d2);
                let x = TorusPoint::reduced(
                    [
                        snf.v_inv[0][0] * y0 + snf.v_inv[0][1] * y1,
                        snf.v_inv[1][0] * y0 + snf.v_inv[1][1] * y1,
                    ],
                    [l, l],
                );
                if seen.contains(&x) {
                    continue;
                }
                if divisor_pows.iter().any(|p| self.fixes(p, &x)) {
                    continue;
                }
                let mut orbit_points = Vec::with_capacity(k as usize);
                let mut current = x;
                for _ in 0..k {
                    orbit_points.push(current);
                    current = current.apply(self.a);
                }
                debug_assert_eq!(current, x, "orbit must close after k steps");
                let representative = *orbit_points.iter().min().expect("nonempty orbit");
                seen.extend(orbit_points);
                orbits.push(MapOrbit {
                    representative,
                    least_period: k,
                    homology_class: k as i64,
                });
            }
        }
        orbits.sort_by(|a, b| a.representative.cmp(&b.representative));
        Ok(orbits)
    }

    /// Birkhoff sum of the roof along a map orbit: the flow period of the
    /// corresponding closed orbit.
    pub fn birkhoff_period(&self, orbit: &MapOrbit) -> f64 {
        let mut sum = 0.0;
        let mut x = orbit.representative;
        for _ in 0..orbit.least_period {
            sum += self.roof.value(x.as_floats());
            x = x.apply(self.a);
        }
        sum
    }

    /// Parity of the iterate wrapping `total` times around the base circle:
    /// even iff `tr(A^total) > 2`, read from the exact trace.
    fn parity_of_total(&self, trace_sign_negative: bool, total: u32) -> Parity {
        if !trace_sign_negative || total % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Full census of closed orbits with period at most `t`.
    pub fn census(&self, t: f64) -> Result<CensusTable> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::BadArgument(format!(
                "census truncation must be finite and nonnegative, got {t}"
            )));
        }
        let spec = self.to_spec();
        let slack = 1e-9 * t.abs().max(1.0);
        let max_period = ((t + slack) / self.roof.min()).floor() as u32;
        let orbits = self.enumerate_map_orbits(max_period)?;
        let neg = self.trace() < 0;
        let records: Vec<OrbitRecord> = orbits
            .par_iter()
            .map(|orbit| {
                let s = self.birkhoff_period(orbit);
                let m = orbit.least_period;
                let mut out = Vec::new();
                let mut k = 1u32;
                while k as f64 * s <= t + slack {
                    let total = k * m;
                    let parity = self.parity_of_total(neg, total);
                    let base_parity = self.parity_of_total(neg, m);
                    out.push(OrbitRecord {
                        simple_id: orbit.representative.to_string(),
                        iterate: k,
                        period: k as f64 * s,
                        class_label: total as i64,
                        cz_parity: parity,
                        cz_index: None,
                        good: !(k % 2 == 0 && parity != base_parity),
                        orbit_type: OrbitType::Hyperbolic,
                        holonomy_sign: Some(if neg && total % 2 == 1 { -1 } else { 1 }),
                    });
                    k += 1;
                }
                out
            })
            .flatten()
            .collect();
        CensusTable::new(spec, t, Grading::Parity, records)
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec::CatSuspension {
            matrix: [self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1]],
            roof: self.roof.spec().clone(),
        }
    }

    /// `(P_T, P^g_T)` without materializing records.
    ///
    /// Constant roofs use the exact trace formula, so counts stay cheap far
    /// beyond any enumerable truncation; variable roofs enumerate orbits
    /// once and bin their Birkhoff sums.
    pub fn pair_counts(&self, t: f64) -> Result<(BigUint, BigUint)> {
        let mut samples = self.growth_samples(&[t])?;
        let (_, p, pg) = samples.pop().expect("one sample");
        Ok((p, pg))
    }

    /// Pair counts over a whole grid of truncation times, sharing one orbit
    /// enumeration for variable roofs.
    pub fn growth_samples(&self, grid: &[f64]) -> Result<Vec<(f64, BigUint, BigUint)>> {
        for &t in grid {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::BadArgument(format!(
                    "truncation times must be finite and nonnegative, got {t}"
                )));
            }
        }
        let neg = self.trace() < 0;
        if self.roof.is_constant() {
            let c = self.roof.min();
            let t_max = grid.iter().fold(0.0_f64, |a, &b| a.max(b));
            let j_max = ((t_max + 1e-9 * t_max.max(1.0)) / c).floor() as u32;
            let counts = self.orbit_counts(j_max);
            // n_all[j] counts pairs of total winding j; n_bad[j] the bad ones.
            let mut n_all: Vec<BigUint> = vec![BigUint::zero(); j_max as usize + 1];
            let mut n_bad: Vec<BigUint> = vec![BigUint::zero(); j_max as usize + 1];
            for j in 1..=j_max {
                for m in 1..=j {
                    if j % m == 0 {
                        let c_m = &counts[m as usize - 1];
                        n_all[j as usize] += c_m;
                        if neg && j % 2 == 0 && m % 2 == 1 {
                            n_bad[j as usize] += c_m;
                        }
                    }
                }
            }
            Ok(grid
                .iter()
                .map(|&t| {
                    let jt = ((t + 1e-9 * t.max(1.0)) / c).floor() as u32;
                    let mut p = BigUint::zero();
                    let mut pg = BigUint::zero();
                    for j in 1..=jt.min(j_max) {
                        p += &n_all[j as usize];
                        pg += &n_all[j as usize] - &n_bad[j as usize];
                    }
                    (t, p, pg)
                })
                .collect())
        } else {
            let t_max = grid.iter().fold(0.0_f64, |a, &b| a.max(b));
            let slack = 1e-9 * t_max.max(1.0);
            let max_period = ((t_max + slack) / self.roof.min()).floor() as u32;
            let orbits = self.enumerate_map_orbits(max_period)?;
            let periods: Vec<(f64, u32)> = orbits
                .par_iter()
                .map(|o| (self.birkhoff_period(o), o.least_period))
                .collect();
            Ok(grid
                .iter()
                .map(|&t| {
                    let mut p: u128 = 0;
                    let mut pg: u128 = 0;
                    for &(s, m) in &periods {
                        let k_max = ((t + slack) / s).floor().max(0.0) as u128;
                        p += k_max;
                        pg += if neg && m % 2 == 1 {
                            // Bad iterates are the even ones.
                            k_max - k_max / 2
                        } else {
                            k_max
                        };
                    }
                    (t, BigUint::from(p), BigUint::from(pg))
                })
                .collect())
        }
    }

    /// Certify uniform contraction of the stable direction along the orbit
    /// of the origin: returns the largest signed defect
    /// `|A^k v_s| - lambda^{t_k}` over the first `samples` returns with
    /// `t_k <= t_max`, where `lambda` is the modeled contraction rate per
    /// unit flow time at the origin's return time.
    ///
    /// Exact eigen-contraction makes this roundoff-small for moderate
    /// `t_max`; the comparison degrades like `eps * lambda_max^k`, so very
    /// long windows are not meaningful in double precision.
    pub fn anosov_cone_check(&self, t_max: f64, samples: u32) -> Result<f64> {
        if samples == 0 {
            return Err(Error::BadArgument("cone check needs at least one sample".into()));
        }
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::BadArgument(format!(
                "cone check horizon must be positive and finite, got {t_max}"
            )));
        }
        let tr = self.trace() as f64;
        let disc = (tr * tr - 4.0).sqrt();
        let lam_s = (tr - tr.signum() * disc) / 2.0;
        let a = self.a;
        // Stable eigenvector from the better-conditioned row.
        let cand1 = [a[0][1] as f64, lam_s - a[0][0] as f64];
        let cand2 = [lam_s - a[1][1] as f64, a[1][0] as f64];
        let n1 = (cand1[0] * cand1[0] + cand1[1] * cand1[1]).sqrt();
        let n2 = (cand2[0] * cand2[0] + cand2[1] * cand2[1]).sqrt();
        let mut v = if n1 >= n2 {
            [cand1[0] / n1, cand1[1] / n1]
        } else {
            [cand2[0] / n2, cand2[1] / n2]
        };
        let return_time = self.roof.value([0.0, 0.0]);
        let rate = lam_s.abs().powf(1.0 / return_time);
        let mut worst = f64::NEG_INFINITY;
        let mut tested = 0u32;
        for k in 1..=samples {
            let t_k = k as f64 * return_time;
            if t_k > t_max {
                break;
            }
            v = [
                a[0][0] as f64 * v[0] + a[0][1] as f64 * v[1],
                a[1][0] as f64 * v[0] + a[1][1] as f64 * v[1],
            ];
            let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
            worst = worst.max(norm - rate.powf(t_k));
            tested += 1;
        }
        if tested == 0 {
            return Err(Error::BadArgument(format!(
                "no return fits in t_max = {t_max}: first return takes {return_time}"
            )));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> ToralSuspension {
        ToralSuspension::new([[2, 1], [1, 1]], Roof::constant(1.0).unwrap()).unwrap()
    }

    fn negative_cat() -> ToralSuspension {
        ToralSuspension::new([[-2, -1], [-1, -1]], Roof::constant(1.0).unwrap()).unwrap()
    }

    #[test]
    fn constructor_rejects_non_anosov_matrices() {
        let roof = Roof::constant(1.0).unwrap();
        // Not determinant 1.
        assert!(ToralSuspension::new([[2, 0], [0, 1]], roof.clone()).is_err());
        // Determinant 1 but elliptic.
        assert!(ToralSuspension::new([[0, -1], [1, 0]], roof.clone()).is_err());
        // Parabolic shear.
        assert!(ToralSuspension::new([[1, 1], [0, 1]], roof).is_err());
    }

    #[test]
    fn traces_follow_the_recurrence() {
        let t = cat().traces_up_to(6);
        let expect: Vec<i64> = vec![2, 3, 7, 18, 47, 123, 322];
        for (a, b) in t.iter().zip(expect) {
            assert_eq!(a, &BigInt::from(b));
        }
    }

    #[test]
    fn fixed_point_counts_match_the_trace_formula() {
        let s = cat();
        let expect: [u64; 6] = [1, 5, 16, 45, 121, 320];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(
                s.periodic_point_count(k as u32 + 1).unwrap(),
                BigUint::from(*e)
            );
        }
        let n = negative_cat();
        // tr = -3: t_k alternates, |t_k - 2| = 5, 5, 20, 45, 125, ...
        let expect_neg: [u64; 5] = [5, 5, 20, 45, 125];
        for (k, e) in expect_neg.iter().enumerate() {
            assert_eq!(
                n.periodic_point_count(k as u32 + 1).unwrap(),
                BigUint::from(*e)
            );
        }
    }

    #[test]
    fn orbit_counts_invert_the_fixed_point_counts() {
        let s = cat();
        let counts = s.orbit_counts(14);
        let expect: [u64; 14] = [
            1, 2, 5, 10, 24, 50, 120, 270, 640, 1500, 3600, 8610, 20880, 50700,
        ];
        for (c, e) in counts.iter().zip(expect) {
            assert_eq!(c, &BigUint::from(e));
        }
        // Sum rule: sum over divisors m of k of m c_m = Fix(A^k).
        for k in 1u32..=14 {
            let mut total = BigUint::zero();
            for m in 1..=k {
                if k % m == 0 {
                    total += BigUint::from(m) * &counts[m as usize - 1];
                }
            }
            assert_eq!(total, s.periodic_point_count(k).unwrap(), "k = {k}");
        }
    }

    #[test]
    fn enumeration_agrees_with_counts() {
        let s = cat();
        let orbits = s.enumerate_map_orbits(8).unwrap();
        let counts = s.orbit_counts(8);
        for m in 1u32..=8 {
            let found = orbits.iter().filter(|o| o.least_period == m).count();
            assert_eq!(
                BigUint::from(found as u64),
                counts[m as usize - 1],
                "period {m}"
            );
        }
    }

    #[test]
    fn negative_cat_has_no_period_two_orbits() {
        let n = negative_cat();
        let counts = n.orbit_counts(4);
        assert_eq!(counts[0], BigUint::from(5u64));
        assert_eq!(counts[1], BigUint::zero());
        let orbits = n.enumerate_map_orbits(2).unwrap();
        assert_eq!(orbits.len(), 5);
        assert!(orbits.iter().all(|o| o.least_period == 1));
    }

    #[test]
    fn orbits_close_exactly() {
        let s = cat();
        for orbit in s.enumerate_map_orbits(6).unwrap() {
            let mut x = orbit.representative;
            for _ in 0..orbit.least_period {
                x = x.apply(s.matrix());
            }
            assert_eq!(x, orbit.representative);
        }
    }

    #[test]
    fn representative_is_the_orbit_minimum() {
        let s = cat();
        for orbit in s.enumerate_map_orbits(5).unwrap() {
            let mut x = orbit.representative;
            for _ in 0..orbit.least_period {
                x = x.apply(s.matrix());
                assert!(orbit.representative <= x);
            }
        }
    }

    #[test]
    fn census_record_counts_at_small_truncations() {
        let s = cat();
        let t3 = s.census(3.0).unwrap();
        assert_eq!(t3.counts(), (10, 10));
        let t5 = s.census(5.0).unwrap();
        assert_eq!(t5.counts(), (48, 48));
        // Truncation below the shortest period is empty.
        let t0 = s.census(0.5).unwrap();
        assert_eq!(t0.counts(), (0, 0));
    }

    #[test]
    fn negative_cat_census_matches_the_hand_count() {
        let n = negative_cat();
        let t2 = n.census(2.0).unwrap();
        // 5 fixed orbits, each with iterates 1 and 2; the second iterates
        // flip parity and are bad.
        assert_eq!(t2.counts(), (10, 5));
        for r in t2.records() {
            if r.iterate == 1 {
                assert_eq!(r.cz_parity, Parity::Odd);
                assert_eq!(r.holonomy_sign, Some(-1));
                assert!(r.good);
            } else {
                assert_eq!(r.cz_parity, Parity::Even);
                assert_eq!(r.holonomy_sign, Some(1));
                assert!(!r.good);
            }
        }
    }

    #[test]
    fn census_counts_match_formula_counts() {
        for model in [cat(), negative_cat()] {
            for t in [2.0, 4.0, 7.5] {
                let table = model.census(t).unwrap();
                let (p, pg) = table.counts();
                let (fp, fpg) = model.pair_counts(t).unwrap();
                assert_eq!(BigUint::from(p), fp, "t = {t}");
                assert_eq!(BigUint::from(pg), fpg, "t = {t}");
            }
        }
    }

    #[test]
    fn good_bound_holds_on_both_signs() {
        for model in [cat(), negative_cat()] {
            let (p, pg) = model.pair_counts(9.0).unwrap();
            assert!(pg <= p.clone() && p <= BigUint::from(2u32) * pg);
        }
    }

    #[test]
    fn holonomy_sign_is_constant_per_class() {
        use std::collections::HashMap;
        let table = negative_cat().census(6.0).unwrap();
        let mut by_class: HashMap<i64, i8> = HashMap::new();
        for r in table.records() {
            let sign = r.holonomy_sign.unwrap();
            if let Some(prev) = by_class.insert(r.class_label, sign) {
                assert_eq!(prev, sign, "class {}", r.class_label);
            }
        }
    }

    #[test]
    fn variable_roof_census_matches_grid_counts() {
        let roof = Roof::from_spec(crate::models::RoofSpec::Trig {
            base: 1.0,
            terms: vec![crate::models::TrigTerm {
                kx: 1,
                ky: 0,
                cos: 0.3,
                sin: 0.0,
            }],
        })
        .unwrap();
        let s = ToralSuspension::new([[2, 1], [1, 1]], roof).unwrap();
        let t = 4.0;
        let table = s.census(t).unwrap();
        let (p, pg) = table.counts();
        let (fp, fpg) = s.pair_counts(t).unwrap();
        assert_eq!(BigUint::from(p), fp);
        assert_eq!(BigUint::from(pg), fpg);
        // The fixed point at the origin sees roof(0) = 1.3, so its first
        // iterate has period 1.3 exactly.
        let first = table
            .records()
            .iter()
            .find(|r| r.simple_id == "0/1,0/1")
            .unwrap();
        assert!((first.period - 1.3).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap_trips_before_memory_does() {
        let s = cat();
        match s.enumerate_map_orbits(40) {
            Err(Error::EnumerationCap { needed, cap }) => {
                assert!(needed > cap);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn cone_check_certifies_exact_contraction() {
        let defect = cat().anosov_cone_check(10.0, 10).unwrap();
        assert!(defect <= 1e-8, "defect {defect}");
        let defect = negative_cat().anosov_cone_check(10.0, 10).unwrap();
        assert!(defect <= 1e-8, "defect {defect}");
    }

    #[test]
    fn scaled_roof_scales_census_periods() {
        let s = cat();
        let doubled =
            ToralSuspension::new([[2, 1], [1, 1]], Roof::constant(2.0).unwrap()).unwrap();
        let base = s.census(4.0).unwrap();
        let scaled = doubled.census(8.0).unwrap();
        assert_eq!(base.counts(), scaled.counts());
        for (a, b) in base.records().iter().zip(scaled.records()) {
            assert!((b.period - 2.0 * a.period).abs() < 1e-9);
            assert_eq!(a.simple_id, b.simple_id);
            assert_eq!(a.cz_parity, b.cz_parity);
        }
    }
}
