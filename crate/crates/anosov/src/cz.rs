//! Conley-Zehnder indices of symplectic paths via the crossing form.
//!
//! A path `Psi : [0, T] -> Sp(2m)` with `Psi(0) = I` has crossings where
//! `det(Psi(t) - I) = 0`.  At a crossing the quadratic form
//! `S(t) = -J Psidot(t) Psi(t)^{-1}` restricted to `ker(Psi(t) - I)`
//! contributes its signature; the initial crossing at `t = 0` contributes
//! half the signature of `S(0)`.  For a path with only regular crossings the
//! index is the sum of these contributions, an integer.
//!
//! Crossing detection scans `d(t) = det(Psi(t) - I)` on a fine grid.  Sign
//! changes are bisected; crossings where `d` touches zero without changing
//! sign (even-dimensional kernels, such as full rotations of an elliptic
//! block) appear as local minima of `|d|` and are refined by golden-section
//! search, then confirmed or discarded by the kernel computation itself.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::symplectic::{
    self, is_symplectic, max_abs, standard_j, symplectic_inverse, Parity, SymplecticMatrix,
};
use crate::tol::Tolerances;

/// Number of grid samples used by the crossing scan.
pub const SCAN_SAMPLES: usize = 2048;

/// Bisection and golden-section refinement stop at this interval width
/// (scaled by `max(1, duration)`).
pub const REFINE_TOL: f64 = 1e-12;

/// Relative singular-value threshold below which a direction counts as
/// kernel of `Psi(t) - I`.
pub const KERNEL_TOL: f64 = 1e-7;

/// `|det(Psi(T) - I)|` at or below this is degenerate: no index.
pub const ENDPOINT_DEGENERACY: f64 = 1e-10;

/// Step used by the finite-difference derivative fallback.
pub const FD_STEP: f64 = 1e-6;

type EvalFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// A continuous symplectic path starting at the identity.
///
/// Wraps an evaluation closure; validation samples the path and checks
/// `Psi(0) = I` within 1e-9 and symplecticity within 1e-7 at 100 points.
/// An analytic derivative closure is optional; without one, derivatives are
/// central finite differences with step [`FD_STEP`].
#[derive(Clone)]
pub struct SymplecticPath {
    dim: usize,
    duration: f64,
    eval: EvalFn,
    deriv: Option<EvalFn>,
}

impl std::fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymplecticPath")
            .field("dim", &self.dim)
            .field("duration", &self.duration)
            .field("analytic_derivative", &self.deriv.is_some())
            .finish()
    }
}

impl SymplecticPath {
    pub fn from_fn<F>(dim: usize, duration: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::build(dim, duration, Arc::new(eval), None)
    }

    pub fn with_derivative<F, G>(dim: usize, duration: f64, eval: F, deriv: G) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
        G: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::build(dim, duration, Arc::new(eval), Some(Arc::new(deriv)))
    }

    fn build(dim: usize, duration: f64, eval: EvalFn, deriv: Option<EvalFn>) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::BadShape {
                rows: dim,
                cols: dim,
            });
        }
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::BadArgument(format!(
                "path duration must be positive and finite, got {duration}"
            )));
        }
        let start = eval(0.0);
        if start.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "evaluation returns {:?}, path dimension is {dim}",
                start.shape()
            )));
        }
        let id_defect = max_abs(&(start - DMatrix::identity(dim, dim)));
        if id_defect > 1e-9 {
            return Err(Error::Validation(format!(
                "path must start at the identity, defect {id_defect:.3e}"
            )));
        }
        for i in 0..100 {
            let t = duration * (i as f64) / 99.0;
            let m = eval(t);
            if !is_symplectic(&m, 1e-7)? {
                return Err(Error::NotSymplectic {
                    defect: symplectic::symplectic_defect(&m)?,
                    tol: 1e-7,
                });
            }
        }
        Ok(SymplecticPath {
            dim,
            duration,
            eval,
            deriv,
        })
    }

    /// Wrap closures whose values are symplectic by construction, skipping
    /// the sampling pass.  Used for iterates of already-validated paths,
    /// whose endpoint norms can outgrow the absolute sampling tolerance.
    fn trusted(dim: usize, duration: f64, eval: EvalFn, deriv: Option<EvalFn>) -> Self {
        SymplecticPath {
            dim,
            duration,
            eval,
            deriv,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_dim(&self) -> usize {
        self.dim / 2
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn evaluate(&self, t: f64) -> DMatrix<f64> {
        (self.eval)(t)
    }

    /// `Psidot(t)`, analytic when available, else a central difference
    /// (one-sided at the ends of the parameter interval).
    pub fn derivative(&self, t: f64) -> DMatrix<f64> {
        if let Some(d) = &self.deriv {
            return d(t);
        }
        let h = FD_STEP * self.duration.max(1.0);
        let lo = (t - h).max(0.0);
        let hi = (t + h).min(self.duration);
        ((self.eval)(hi) - (self.eval)(lo)) / (hi - lo)
    }

    /// The endpoint `Psi(T)` as a validated symplectic matrix.
    pub fn endpoint(&self) -> SymplecticMatrix {
        SymplecticMatrix::trusted(self.evaluate(self.duration))
    }

    /// Planar rotation path `t -> R(2 pi turns t)` on `[0, 1]`.
    ///
    /// Models the linearized flow around an elliptic orbit; its index is
    /// `2 floor(turns) + 1` for non-integer `turns`.
    pub fn rotation(turns: f64) -> Result<Self> {
        if !turns.is_finite() {
            return Err(Error::BadArgument("rotation amount must be finite".into()));
        }
        let omega = 2.0 * std::f64::consts::PI * turns;
        let eval = move |t: f64| {
            let a = omega * t;
            DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
        };
        let deriv = move |t: f64| {
            let a = omega * t;
            DMatrix::from_row_slice(2, 2, &[-a.sin(), -a.cos(), a.cos(), -a.sin()])
                .scale(omega)
        };
        Self::build(2, 1.0, Arc::new(eval), Some(Arc::new(deriv)))
    }

    /// Hyperbolic path `t -> diag(e^{rate t}, e^{-rate t})` on `[0, 1]`.
    ///
    /// Positive-eigenvalue hyperbolic return map; index 0 for every
    /// `rate != 0`, and all iterates have index 0 as well.
    pub fn hyperbolic(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate == 0.0 {
            return Err(Error::BadArgument(format!(
                "hyperbolic rate must be finite and nonzero, got {rate}"
            )));
        }
        let eval = move |t: f64| {
            DMatrix::from_row_slice(2, 2, &[(rate * t).exp(), 0.0, 0.0, (-rate * t).exp()])
        };
        let deriv = move |t: f64| {
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    rate * (rate * t).exp(),
                    0.0,
                    0.0,
                    -rate * (-rate * t).exp(),
                ],
            )
        };
        Self::build(2, 1.0, Arc::new(eval), Some(Arc::new(deriv)))
    }

    /// Negative-hyperbolic path `t -> R(pi t) diag(e^{rate t}, e^{-rate t})`
    /// on `[0, 1]`, ending at a hyperbolic map with negative eigenvalues.
    ///
    /// For `0 < rate < pi` the index is 1, and the index of the j-th
    /// iterate is j: the even/odd alternation against the constant parity
    /// of [`Self::hyperbolic`] is what makes even iterates bad orbits.
    pub fn negative_hyperbolic(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate == 0.0 {
            return Err(Error::BadArgument(format!(
                "negative-hyperbolic rate must be finite and nonzero, got {rate}"
            )));
        }
        let pi = std::f64::consts::PI;
        let eval = move |t: f64| {
            let a = pi * t;
            let (c, s) = (a.cos(), a.sin());
            let (ep, em) = ((rate * t).exp(), (-rate * t).exp());
            DMatrix::from_row_slice(2, 2, &[c * ep, -s * em, s * ep, c * em])
        };
        let deriv = move |t: f64| {
            let a = pi * t;
            let (c, s) = (a.cos(), a.sin());
            let (ep, em) = ((rate * t).exp(), (-rate * t).exp());
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    ep * (rate * c - pi * s),
                    -em * (pi * c - rate * s),
                    ep * (pi * c + rate * s),
                    em * (-pi * s - rate * c),
                ],
            )
        };
        Self::build(2, 1.0, Arc::new(eval), Some(Arc::new(deriv)))
    }

    /// Symplectic direct sum of paths of equal duration.
    ///
    /// Coordinates interleave so that the q-sector of every summand lands in
    /// the q-sector of the sum; a plain block-diagonal stacking would not be
    /// symplectic for the standard `J`.  The index is additive over summands.
    pub fn direct_sum(paths: &[SymplecticPath]) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::BadArgument("direct sum of no paths".into()));
        }
        let duration = paths[0].duration;
        for p in paths {
            if (p.duration - duration).abs() > 1e-12 * duration.max(1.0) {
                return Err(Error::BadArgument(
                    "direct summands must share a duration".into(),
                ));
            }
        }
        let dim: usize = paths.iter().map(|p| p.dim).sum();
        let m = dim / 2;
        // offsets[b] = number of q-coordinates before block b
        let mut offsets = Vec::with_capacity(paths.len());
        let mut acc = 0usize;
        for p in paths {
            offsets.push(acc);
            acc += p.half_dim();
        }
        let embed = {
            let sizes: Vec<usize> = paths.iter().map(|p| p.half_dim()).collect();
            let offsets = offsets.clone();
            move |blocks: Vec<DMatrix<f64>>| {
                let mut out = DMatrix::zeros(dim, dim);
                for (b, blk) in blocks.iter().enumerate() {
                    let mb = sizes[b];
                    let off = offsets[b];
                    let global = |local: usize| {
                        if local < mb {
                            off + local
                        } else {
                            m + off + (local - mb)
                        }
                    };
                    for r in 0..2 * mb {
                        for c in 0..2 * mb {
                            out[(global(r), global(c))] = blk[(r, c)];
                        }
                    }
                }
                out
            }
        };
        let evals: Vec<EvalFn> = paths.iter().map(|p| p.eval.clone()).collect();
        let embed_eval = embed.clone();
        let eval = move |t: f64| embed_eval(evals.iter().map(|e| e(t)).collect());
        let all_analytic = paths.iter().all(|p| p.deriv.is_some());
        let deriv: Option<EvalFn> = if all_analytic {
            let derivs: Vec<EvalFn> = paths
                .iter()
                .map(|p| p.deriv.clone().expect("checked analytic"))
                .collect();
            let embed_deriv = embed;
            Some(Arc::new(move |t: f64| {
                // Off-block entries of the derivative are zero, so embedding
                // the blockwise derivatives is the derivative of the embedding.
                embed_deriv(derivs.iter().map(|d| d(t)).collect())
            }))
        } else {
            None
        };
        Self::build(dim, duration, Arc::new(eval), deriv)
    }

    /// The k-fold iterate: `Psi_k(s + j T) = Psi(s) Psi(T)^j` on `[0, k T]`.
    pub fn iterate(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadArgument("iterate count must be positive".into()));
        }
        let t1 = self.duration;
        let end = self.evaluate(t1);
        let mut powers = Vec::with_capacity(k as usize);
        powers.push(DMatrix::identity(self.dim, self.dim));
        for j in 1..k as usize {
            let next = &end * &powers[j - 1];
            powers.push(next);
        }
        let powers = Arc::new(powers);
        let base_eval = self.eval.clone();
        let split = move |t: f64| -> (f64, usize) {
            let mut j = (t / t1).floor() as isize;
            if j < 0 {
                j = 0;
            }
            if j as usize >= k as usize {
                j = k as isize - 1;
            }
            (t - (j as f64) * t1, j as usize)
        };
        let eval_powers = powers.clone();
        let eval_split = split.clone();
        let eval = move |t: f64| {
            let (s, j) = eval_split(t);
            base_eval(s) * &eval_powers[j]
        };
        let deriv: Option<EvalFn> = self.deriv.clone().map(|base_deriv| {
            let d_split = split;
            let d_powers = powers;
            Arc::new(move |t: f64| {
                let (s, j) = d_split(t);
                base_deriv(s) * &d_powers[j]
            }) as EvalFn
        });
        Ok(Self::trusted(
            self.dim,
            t1 * k as f64,
            Arc::new(eval),
            deriv,
        ))
    }
}

/// One crossing with its integer contribution to the index.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// Signature of the crossing form; half-signature of `S(0)` at `t = 0`.
    pub contribution: i64,
}

/// A computed Conley-Zehnder index together with its crossing breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexResult {
    pub index: i64,
    pub crossings: Vec<Crossing>,
}

/// The symmetrized crossing form `S(t) = -J Psidot(t) Psi(t)^{-1}`.
fn crossing_form(path: &SymplecticPath, t: f64, psi: &DMatrix<f64>) -> DMatrix<f64> {
    let j = standard_j(path.dim());
    let s = -(&j * path.derivative(t) * symplectic_inverse(psi));
    (&s + s.transpose()) * 0.5
}

fn det_minus_identity(psi: &DMatrix<f64>) -> f64 {
    let n = psi.nrows();
    (psi - DMatrix::identity(n, n)).determinant()
}

/// Signature of a symmetric matrix, counting eigenvalues above and below
/// `cut` in magnitude; eigenvalues inside the cut are reported as `None`
/// (irregular).
fn signature(sym: &DMatrix<f64>, cut: f64) -> Option<i64> {
    let eig = sym.clone().symmetric_eigen();
    let mut sig = 0i64;
    for &ev in eig.eigenvalues.iter() {
        if ev.abs() <= cut {
            return None;
        }
        sig += if ev > 0.0 { 1 } else { -1 };
    }
    Some(sig)
}

/// Basis of `ker(Psi(t) - I)` via SVD; empty when no singular value falls
/// below [`KERNEL_TOL`] relative to the largest.
fn kernel_basis(psi: &DMatrix<f64>) -> DMatrix<f64> {
    let n = psi.nrows();
    let m = psi - DMatrix::identity(n, n);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("svd with v_t requested");
    let smax = svd.singular_values.max();
    // Relative to the largest singular value, but floored at 1 so that a
    // full elliptic turn, where Psi(t) - I vanishes entirely and every
    // singular value is roundoff, still reports its full kernel.
    let cut = KERNEL_TOL * smax.max(1.0);
    let mut cols: Vec<usize> = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cut {
            cols.push(i);
        }
    }
    let mut basis = DMatrix::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        basis.column_mut(k).copy_from(&v_t.row(i).transpose());
    }
    basis
}

struct ScanOutcome {
    /// Refined crossing times, cleaned and deduplicated.
    crossings: Vec<f64>,
    /// Local minima of |d| that refined to a value too large to accept and
    /// too small to dismiss; a nonempty list triggers a shifted rescan.
    ambiguous: Vec<f64>,
}

/// Scan `d(t) = det(Psi(t) - I)` on a grid offset by `phase`, refine sign
/// changes by bisection and tangential touches by golden-section search.
fn scan_crossings(path: &SymplecticPath, phase: f64) -> ScanOutcome {
    let t1 = path.duration();
    let n = SCAN_SAMPLES;
    let refine_tol = REFINE_TOL * t1.max(1.0);
    let d_at = |t: f64| det_minus_identity(&path.evaluate(t));
    let ts: Vec<f64> = (0..=n)
        .map(|i| ((t1 * i as f64) / n as f64 + phase).min(t1))
        .collect();
    let ds: Vec<f64> = ts.iter().map(|&t| d_at(t)).collect();

    let mut found: Vec<f64> = Vec::new();
    let mut ambiguous: Vec<f64> = Vec::new();

    // The value of |d| below which a refined minimum counts as a genuine
    // touch.  Scaled by the largest |d| seen so higher-dimensional paths
    // with large determinant swings are not flooded with false touches.
    let d_scale = ds.iter().fold(0.0_f64, |a, &x| a.max(x.abs())).max(1.0);
    let touch_tol = 1e-9 * d_scale;

    for i in 0..n {
        let (d0, d1) = (ds[i], ds[i + 1]);
        if d0 == 0.0 {
            found.push(ts[i]);
            continue;
        }
        if d0 * d1 < 0.0 {
            // Plain sign change: bisect.
            let (mut lo, mut hi) = (ts[i], ts[i + 1]);
            let (mut dlo, _) = (d0, d1);
            while hi - lo > refine_tol {
                let mid = 0.5 * (lo + hi);
                let dm = d_at(mid);
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if dlo * dm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            found.push(0.5 * (lo + hi));
        }
    }
    if ds[n] == 0.0 {
        found.push(ts[n]);
    }

    // Tangential touches: local minima of |d| without a sign change.
    for i in 1..n {
        let (am, a0, ap) = (ds[i - 1].abs(), ds[i].abs(), ds[i + 1].abs());
        if a0 < am && a0 <= ap && ds[i - 1] * ds[i + 1] > 0.0 && ds[i] != 0.0 {
            let (t_star, d_star) = golden_min(&d_at, ts[i - 1], ts[i + 1], refine_tol);
            if d_star.abs() <= touch_tol {
                found.push(t_star);
            } else if a0 <= touch_tol {
                // The grid saw a near-zero but refinement could not confirm
                // a touch: ambiguous, let the caller rescan on a shifted grid.
                ambiguous.push(t_star);
            }
        }
    }

    // Drop the initial crossing (handled separately), dedupe, sort.
    let cutoff = 1e-6 * t1.max(1.0);
    found.retain(|&t| t > cutoff);
    found.sort_by(f64::total_cmp);
    let mut crossings: Vec<f64> = Vec::new();
    for t in found {
        if crossings.last().is_none_or(|&prev| t - prev > cutoff) {
            crossings.push(t);
        }
    }
    ScanOutcome {
        crossings,
        ambiguous,
    }
}

/// Golden-section minimization of `|d|` on `[lo, hi]`.
fn golden_min(d_at: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = d_at(x1).abs();
    let mut f2 = d_at(x2).abs();
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = d_at(x1).abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = d_at(x2).abs();
        }
    }
    let t = 0.5 * (lo + hi);
    (t, d_at(t))
}

/// Conley-Zehnder index of a path with nondegenerate endpoint.
///
/// Errors with [`Error::Degenerate`] when `|det(Psi(T) - I)|` is at or below
/// [`ENDPOINT_DEGENERACY`], and with [`Error::IrregularCrossing`] when a
/// crossing form is singular on the kernel even after one shifted rescan.
pub fn cz_index(path: &SymplecticPath) -> Result<IndexResult> {
    let t1 = path.duration();
    let d_end = det_minus_identity(&path.evaluate(t1));
    if d_end.abs() <= ENDPOINT_DEGENERACY {
        return Err(Error::Degenerate(d_end.abs()));
    }

    let mut outcome = scan_crossings(path, 0.0);
    if !outcome.ambiguous.is_empty() {
        // One retry on a shifted grid resolves grid points that landed too
        // close to a zero of d.
        let shifted = scan_crossings(path, t1 * 1e-5);
        if shifted.ambiguous.is_empty() {
            outcome = shifted;
        } else {
            return Err(Error::IrregularCrossing {
                t: shifted.ambiguous[0],
                why: "determinant touch could not be resolved on a shifted grid".into(),
            });
        }
    }

    let mut crossings = Vec::new();
    let mut index = 0i64;

    // Initial crossing: half signature of S(0), which must be nonsingular.
    let s0 = crossing_form(path, 0.0, &DMatrix::identity(path.dim(), path.dim()));
    let s0_scale = max_abs(&s0).max(1e-300);
    let sig0 = signature(&s0, 1e-8 * s0_scale).ok_or_else(|| Error::IrregularCrossing {
        t: 0.0,
        why: "crossing form at t = 0 is singular".into(),
    })?;
    // A symmetric matrix of even dimension with nonzero eigenvalues has even
    // signature only when paired with the kernel dimension; here the kernel
    // at t = 0 is the full space, so the half signature can be half-integer
    // only if sig0 is odd, which cannot happen in even dimension.
    debug_assert!(sig0.rem_euclid(2) == 0);
    let c0 = sig0 / 2;
    index += c0;
    crossings.push(Crossing {
        t: 0.0,
        contribution: c0,
    });

    for &t_star in &outcome.crossings {
        let psi = path.evaluate(t_star);
        let kernel = kernel_basis(&psi);
        if kernel.ncols() == 0 {
            // Small determinant without a small singular value: a spurious
            // product of moderately small factors, not a crossing.
            continue;
        }
        let s = crossing_form(path, t_star, &psi);
        let restricted = kernel.transpose() * &s * &kernel;
        let scale = max_abs(&restricted).max(max_abs(&s)).max(1e-300);
        let sig = signature(&restricted, 1e-8 * scale).ok_or_else(|| Error::IrregularCrossing {
            t: t_star,
            why: "crossing form is singular on the kernel".into(),
        })?;
        index += sig;
        crossings.push(Crossing {
            t: t_star,
            contribution: sig,
        });
    }

    Ok(IndexResult { index, crossings })
}

/// Check that the index parity agrees with the determinant-sign parity of
/// the endpoint: the two are computed by unrelated routes, so agreement is a
/// strong consistency test of both.
pub fn cz_parity_cross_check(path: &SymplecticPath) -> Result<bool> {
    let result = cz_index(path)?;
    let endpoint = path.evaluate(path.duration());
    let det_parity =
        symplectic::parity_of_return_map(&endpoint, Tolerances::default().degeneracy)?;
    Ok(Parity::of(result.index) == det_parity)
}
