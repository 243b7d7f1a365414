//! Invariant Lagrangian bundles along periodic orbits.
//!
//! A hyperbolic symplectic cocycle (a finite word of symplectic matrices,
//! closed when it represents the return maps along one closed orbit) has a
//! dominant invariant subbundle, the unstable one.  For symplectic cocycles
//! the unstable bundle is automatically Lagrangian: eigenvectors with
//! `|eigenvalue| > 1` pair to zero under the form because
//! `w(P u, P v) = w(u, v)` forces `(1 - lambda mu) w(u, v) = 0`.
//!
//! Power iteration with per-step orthonormalization converges to this bundle
//! at a rate set by the spectral gap; the convergence defect reported is the
//! principal-angle distance between consecutive sweeps.  The orientation
//! class of the bundle around a closed orbit is the sign of the determinant
//! of the induced return map on the bundle, and matching it against the
//! determinant-sign parity of the full return map is the parity equivalence
//! check.

use nalgebra::DMatrix;

use crate::census::CensusTable;
use crate::error::{Error, Result};
use crate::symplectic::{LagrangianFrame, SymplecticMatrix};
use crate::tol::Tolerances;

/// Default cap on power-iteration sweeps.
pub const MAX_SWEEPS: usize = 200;

/// Default convergence tolerance on the principal-angle defect.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// Margin by which the restricted return map must expand.
pub const EXPANSION_MARGIN: f64 = 1e-6;

/// A finite symplectic cocycle: matrices applied in order.
#[derive(Debug, Clone)]
pub struct CocycleSample {
    steps: Vec<SymplecticMatrix>,
    closed: bool,
}

impl CocycleSample {
    /// A closed cocycle: the word of return maps around one closed orbit.
    pub fn closed(steps: Vec<SymplecticMatrix>) -> Result<Self> {
        Self::build(steps, true)
    }

    /// An open cocycle: a segment of return maps, no periodicity implied.
    pub fn open(steps: Vec<SymplecticMatrix>) -> Result<Self> {
        Self::build(steps, false)
    }

    fn build(steps: Vec<SymplecticMatrix>, closed: bool) -> Result<Self> {
        let Some(first) = steps.first() else {
            return Err(Error::BadArgument("cocycle needs at least one step".into()));
        };
        let dim = first.dim();
        for s in &steps {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "cocycle steps mix dimensions {} and {}",
                    dim,
                    s.dim()
                )));
            }
        }
        Ok(CocycleSample { steps, closed })
    }

    pub fn steps(&self) -> &[SymplecticMatrix] {
        &self.steps
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn dim(&self) -> usize {
        self.steps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The full word `M_{k-1} ... M_1 M_0`.
    pub fn word(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut acc = DMatrix::identity(dim, dim);
        for s in &self.steps {
            acc = s.matrix() * acc;
        }
        acc
    }
}

/// The computed unstable bundle along a cocycle.
#[derive(Debug, Clone)]
pub struct BundleSample {
    /// One orthonormal Lagrangian frame per site; `len + 1` frames for an
    /// open cocycle, `len` for a closed one (the wrap returns to frame 0).
    frames: Vec<LagrangianFrame>,
    /// Induced maps between consecutive frames, `G_i = F_{i+1}^T M_i F_i`.
    transitions: Vec<DMatrix<f64>>,
    closed: bool,
    convergence_defect: f64,
}

impl BundleSample {
    pub fn frames(&self) -> &[LagrangianFrame] {
        &self.frames
    }

    pub fn transitions(&self) -> &[DMatrix<f64>] {
        &self.transitions
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn convergence_defect(&self) -> f64 {
        self.convergence_defect
    }

    /// The return map induced on the bundle around a closed cocycle,
    /// expressed in the frame at site 0.
    pub fn induced_return_map(&self) -> Result<DMatrix<f64>> {
        if !self.closed {
            return Err(Error::Validation(
                "induced return maps need a closed cocycle".into(),
            ));
        }
        let m = self.transitions[0].nrows();
        let mut acc = DMatrix::identity(m, m);
        for g in &self.transitions {
            acc = g * &acc;
        }
        Ok(acc)
    }
}

/// Deterministic full-rank start frame for the power iteration.
///
/// A fixed pseudo-random pattern rather than coordinate vectors, so that
/// the iteration cannot start exactly orthogonal to the unstable bundle of
/// any reasonable cocycle.
fn seed_frame(dim: usize, m: usize) -> DMatrix<f64> {
    let mut state = 0x9e37_79b9_7f4a_7c15_u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let raw = DMatrix::from_fn(dim, m, |_, _| next());
    raw.qr().q()
}

/// Largest principal-angle sine between the column spans of two orthonormal
/// frames.
fn span_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let residual = b - a * (a.transpose() * b);
    residual.svd(false, false).singular_values.max()
}

/// Power iteration for the unstable bundle of a cocycle.
///
/// Sweeps the cocycle up to `max_sweeps` times, orthonormalizing after each
/// step, until consecutive sweeps agree to `tol` in principal angle.  Fails
/// with [`Error::NotHyperbolic`] when the iteration stalls (elliptic or
/// identity behavior) or when the limit bundle is not uniformly expanded.
pub fn compute_unstable(
    cocycle: &CocycleSample,
    max_sweeps: usize,
    tol: f64,
) -> Result<BundleSample> {
    let dim = cocycle.dim();
    let m = dim / 2;
    let mut f = seed_frame(dim, m);
    let mut defect = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let previous = f.clone();
        for s in cocycle.steps() {
            f = (s.matrix() * f).qr().q();
        }
        defect = span_distance(&f, &previous);
        if defect <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotHyperbolic(format!(
            "power iteration stalled at principal-angle defect {defect:.3e} \
             after {max_sweeps} sweeps"
        )));
    }

    // Walk once more to collect per-site frames and transitions.
    let sites = cocycle.len();
    let mut frames_raw: Vec<DMatrix<f64>> = Vec::with_capacity(sites + 1);
    frames_raw.push(f);
    for s in cocycle.steps() {
        let prev = frames_raw.last().expect("nonempty");
        frames_raw.push((s.matrix() * prev).qr().q());
    }
    let mut transitions = Vec::with_capacity(sites);
    for (i, s) in cocycle.steps().iter().enumerate() {
        let target: &DMatrix<f64> = if cocycle.is_closed() && i + 1 == sites {
            &frames_raw[0]
        } else {
            &frames_raw[i + 1]
        };
        transitions.push(target.transpose() * (s.matrix() * &frames_raw[i]));
    }

    if cocycle.is_closed() {
        // Invariance around the loop: the final frame must return to the
        // starting span.
        let wrap = span_distance(&frames_raw[0], &frames_raw[sites]);
        if wrap > tol.max(1e-8) {
            return Err(Error::NotHyperbolic(format!(
                "bundle does not close up around the loop: angle defect {wrap:.3e}"
            )));
        }
        frames_raw.pop();
    }

    // A frame converged to `tol` in principal angle is isotropic only to
    // about `tol` itself, so the Lagrangian validation gets a proportional
    // tolerance rather than the strict construction default.
    let mut frame_tol = Tolerances::default();
    frame_tol.isotropy = (100.0 * tol).max(frame_tol.isotropy);
    let mut frames = Vec::with_capacity(frames_raw.len());
    for raw in frames_raw {
        frames.push(LagrangianFrame::with_tolerances(raw, &frame_tol).map_err(|e| match e {
            Error::NotIsotropic { defect, tol } => Error::NotHyperbolic(format!(
                "limit bundle is not Lagrangian: isotropy defect {defect:.3e} \
                 exceeds {tol:.3e}; the cocycle has no dominant Lagrangian bundle"
            )),
            other => other,
        })?);
    }

    let bundle = BundleSample {
        frames,
        transitions,
        closed: cocycle.is_closed(),
        convergence_defect: defect,
    };

    if cocycle.is_closed() {
        // Uniform expansion of the induced return map certifies that the
        // dominant bundle really is unstable, not neutral.
        let induced = bundle.induced_return_map()?;
        let eigs = induced.complex_eigenvalues();
        let min_mod = eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(min_mod > 1.0 + EXPANSION_MARGIN) {
            return Err(Error::NotHyperbolic(format!(
                "induced return map has an eigenvalue of modulus {min_mod:.6}, \
                 expansion needs all moduli above 1"
            )));
        }
    }

    Ok(bundle)
}

/// Orientation sign of the unstable bundle around a closed cocycle: the
/// sign of `det` of the induced return map.  -1 means the bundle is
/// nonorientable along the orbit.
pub fn holonomy_sign(bundle: &BundleSample) -> Result<i8> {
    let induced = bundle.induced_return_map()?;
    let det = induced.determinant();
    if det == 0.0 {
        return Err(Error::Singular(
            "induced return map is singular, holonomy sign undefined".into(),
        ));
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

/// Check the parity identity: the determinant-sign parity of the full
/// return map is even exactly when the unstable bundle is orientable
/// around the orbit.
pub fn parity_equivalence_check(cocycle: &CocycleSample) -> Result<bool> {
    parity_equivalence_check_with(cocycle, CONVERGENCE_TOL)
}

/// As [`parity_equivalence_check`], with an explicit power-iteration
/// convergence tolerance.
pub fn parity_equivalence_check_with(cocycle: &CocycleSample, tol: f64) -> Result<bool> {
    if !cocycle.is_closed() {
        return Err(Error::Validation(
            "parity equivalence is a statement about closed orbits".into(),
        ));
    }
    let word = cocycle.word();
    let parity =
        crate::symplectic::parity_of_return_map(&word, Tolerances::default().degeneracy)?;
    let bundle = compute_unstable(cocycle, MAX_SWEEPS, tol)?;
    let sign = holonomy_sign(&bundle)?;
    Ok((parity == crate::symplectic::Parity::Even) == (sign > 0))
}

/// Check that holonomy signs recorded in a census are constant on each
/// free-homotopy class: orientability is a property of the class, not the
/// orbit, so a split class falsifies the bundle data.
pub fn homology_naturality_check(table: &CensusTable) -> Result<bool> {
    use std::collections::HashMap;
    let mut by_class: HashMap<i64, i8> = HashMap::new();
    for r in table.records() {
        let Some(sign) = r.holonomy_sign else {
            return Err(Error::Validation(format!(
                "record {} iterate {} has no holonomy sign; naturality needs \
                 bundle data on every record",
                r.simple_id, r.iterate
            )));
        };
        if let Some(prev) = by_class.insert(r.class_label, sign) {
            if prev != sign {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
