//! Linear symplectic algebra over `R^{2m}`.
//!
//! The standard symplectic form is `w(u, v) = u^T J v` with
//!
//! ```text
//!     J = [ 0  -I ]
//!         [ I   0 ]
//! ```
//!
//! so the span of the first `m` coordinate vectors is Lagrangian.  A return
//! map `P` preserving a Lagrangian subspace `E` takes, in any adapted basis,
//! the upper block-triangular shape
//!
//! ```text
//!     P ~ [ A  B ]        C = (A^T)^{-1},   A^{-1} B symmetric,
//!         [ 0  C ]
//! ```
//!
//! and `det(I - P) = (det A)^{-1} det(I - A)^2 (-1)^m`.  The sign of
//! `det(I - P)` therefore reduces to the sign of `det A`, which is what
//! [`det_sign_parity`] reads off.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Parity of a Conley-Zehnder index.
///
/// On a parity-graded complex this is the entire grading, and for a
/// nondegenerate return map it is computable from `sign det(I - P)` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of an integer grading.
    pub fn of(index: i64) -> Parity {
        if index.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// The standard symplectic structure `J` on `R^dim`, `dim = 2m`.
pub fn standard_j(dim: usize) -> DMatrix<f64> {
    assert!(dim % 2 == 0, "J needs an even dimension");
    let m = dim / 2;
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..m {
        j[(i, m + i)] = -1.0;
        j[(m + i, i)] = 1.0;
    }
    j
}

/// Largest entry magnitude, the max norm used by all defect checks.
pub fn max_abs(mat: &DMatrix<f64>) -> f64 {
    mat.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Max-norm defect of the symplectic identity `M^T J M = J`.
pub fn symplectic_defect(mat: &DMatrix<f64>) -> Result<f64> {
    let (rows, cols) = mat.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(Error::BadShape { rows, cols });
    }
    let j = standard_j(rows);
    let defect = mat.transpose() * &j * mat - &j;
    Ok(max_abs(&defect))
}

/// Whether `M^T J M = J` holds within `tol` in the max norm.
pub fn is_symplectic(mat: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_defect(mat)? <= tol)
}

/// Inverse of a symplectic matrix via `M^{-1} = -J M^T J`.
///
/// Exact up to rounding when the argument is symplectic; no factorization.
pub fn symplectic_inverse(mat: &DMatrix<f64>) -> DMatrix<f64> {
    let j = standard_j(mat.nrows());
    -(&j * mat.transpose() * &j)
}

/// A square matrix validated as symplectic.
///
/// Construction checks the shape, the symplectic identity within
/// [`Tolerances::symplectic`], and `det = 1` within [`Tolerances::det_one`].
/// The absolute tolerances are calibrated for matrices of moderate norm;
/// large words of a cocycle should be handled by exact arithmetic upstream,
/// not by loosening them.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    mat: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerances(mat, &Tolerances::default())
    }

    pub fn with_tolerances(mat: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let defect = symplectic_defect(&mat)?;
        if defect > tol.symplectic {
            return Err(Error::NotSymplectic {
                defect,
                tol: tol.symplectic,
            });
        }
        let det = mat.determinant();
        if (det - 1.0).abs() > tol.det_one * det.abs().max(1.0) {
            return Err(Error::Validation(format!(
                "symplectic matrix must have det 1, got {det}"
            )));
        }
        Ok(SymplecticMatrix { mat })
    }

    /// Wrap a matrix that is symplectic by construction, skipping validation.
    pub(crate) fn trusted(mat: DMatrix<f64>) -> Self {
        debug_assert!(symplectic_defect(&mat).map_or(false, |d| d < 1e-6));
        SymplecticMatrix { mat }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim % 2 != 0 || dim == 0 {
            return Err(Error::BadShape {
                rows: dim,
                cols: dim,
            });
        }
        Ok(SymplecticMatrix {
            mat: DMatrix::identity(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Half the ambient dimension, the `m` in `R^{2m}`.
    pub fn half_dim(&self) -> usize {
        self.mat.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn inverse(&self) -> SymplecticMatrix {
        SymplecticMatrix {
            mat: symplectic_inverse(&self.mat),
        }
    }
}

/// A full-rank isotropic frame: `2m x m`, columns spanning a Lagrangian
/// subspace.
///
/// Construction rejects numerically rank-deficient frames (smallest singular
/// value below [`Tolerances::frame_rank`] times the largest, or condition
/// number above [`Tolerances::frame_condition_limit`]) and frames whose span
/// is not isotropic within [`Tolerances::isotropy`].
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    frame: DMatrix<f64>,
}

impl LagrangianFrame {
    pub fn new(frame: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerances(frame, &Tolerances::default())
    }

    pub fn with_tolerances(frame: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let (rows, cols) = frame.shape();
        if rows == 0 || rows % 2 != 0 || cols != rows / 2 {
            return Err(Error::BadShape { rows, cols });
        }
        let svd = frame.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= tol.frame_rank * smax {
            return Err(Error::Singular(format!(
                "frame is numerically rank deficient: singular values span [{smin:.3e}, {smax:.3e}]"
            )));
        }
        if smax / smin > tol.frame_condition_limit {
            return Err(Error::Singular(format!(
                "frame condition number {:.3e} exceeds {:.1e}",
                smax / smin,
                tol.frame_condition_limit
            )));
        }
        let j = standard_j(rows);
        let defect = max_abs(&(frame.transpose() * &j * &frame));
        if defect > tol.isotropy {
            return Err(Error::NotIsotropic {
                defect,
                tol: tol.isotropy,
            });
        }
        Ok(LagrangianFrame { frame })
    }

    /// The frame spanned by the first `m` coordinate vectors of `R^dim`.
    pub fn coordinate(dim: usize) -> Result<Self> {
        if dim % 2 != 0 || dim == 0 {
            return Err(Error::BadShape {
                rows: dim,
                cols: dim / 2,
            });
        }
        let m = dim / 2;
        let mut f = DMatrix::zeros(dim, m);
        for i in 0..m {
            f[(i, i)] = 1.0;
        }
        Ok(LagrangianFrame { frame: f })
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Orthonormal basis of the span, with a deterministic sign convention:
    /// each column is flipped so its largest-magnitude entry is positive.
    ///
    /// The convention makes frames that are already orthonormal (such as
    /// coordinate frames) come back unchanged, so block forms computed in the
    /// standard basis recover their blocks entrywise.
    pub fn orthonormal_basis(&self) -> DMatrix<f64> {
        let qr = self.frame.clone().qr();
        let mut q = qr.q();
        for mut col in q.column_iter_mut() {
            let mut lead = 0.0_f64;
            for &x in col.iter() {
                if x.abs() > lead.abs() {
                    lead = x;
                }
            }
            if lead < 0.0 {
                col.neg_mut();
            }
        }
        q
    }
}

/// The blocks of a return map written in a basis adapted to an invariant
/// Lagrangian subspace.
///
/// Validated on construction: `C = (A^T)^{-1}` and `A^{-1} B` symmetric,
/// both within [`Tolerances::block`] relative to the block magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTriple {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    basis: DMatrix<f64>,
}

impl BlockTriple {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        let basis = DMatrix::identity(2 * m, 2 * m);
        Self::with_basis(a, b, c, basis, &Tolerances::default())
    }

    fn with_basis(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        basis: DMatrix<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m || b.shape() != (m, m) || c.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "block triple wants three {m}x{m} blocks, got {:?}, {:?}, {:?}",
                a.shape(),
                b.shape(),
                c.shape()
            )));
        }
        let a_inv = a.clone().try_inverse().ok_or_else(|| {
            Error::Singular("A block of a symplectic block form must be invertible".into())
        })?;
        let scale = max_abs(&a).max(max_abs(&c)).max(1.0);
        let c_defect = max_abs(&(&c - a_inv.transpose()));
        if c_defect > tol.block * scale {
            return Err(Error::Validation(format!(
                "C block deviates from (A^T)^{{-1}} by {c_defect:.3e}"
            )));
        }
        let ab = &a_inv * &b;
        let sym_defect = max_abs(&(&ab - ab.transpose()));
        if sym_defect > tol.block * max_abs(&ab).max(1.0) {
            return Err(Error::Validation(format!(
                "A^{{-1}} B deviates from symmetry by {sym_defect:.3e}"
            )));
        }
        Ok(BlockTriple { a, b, c, basis })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// The orthogonal symplectic basis `[F | JF]` in which the blocks were
    /// read off.  Columns `0..m` span the invariant Lagrangian.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Reassemble the block-triangular matrix `[[A, B], [0, C]]`.
    pub fn assemble(&self) -> DMatrix<f64> {
        let m = self.a.nrows();
        let mut p = DMatrix::zeros(2 * m, 2 * m);
        p.view_mut((0, 0), (m, m)).copy_from(&self.a);
        p.view_mut((0, m), (m, m)).copy_from(&self.b);
        p.view_mut((m, m), (m, m)).copy_from(&self.c);
        p
    }

    /// The block form conjugated back to the original coordinates,
    /// `basis * [[A, B], [0, C]] * basis^T`.
    pub fn conjugated(&self) -> DMatrix<f64> {
        &self.basis * self.assemble() * self.basis.transpose()
    }
}

/// Build the Lagrangian-invariant symplectic matrix `[[A, A S], [0, (A^T)^{-1}]]`
/// from an invertible `A` and a symmetric `S`.
///
/// Every symplectic matrix preserving the coordinate Lagrangian arises this
/// way, so this is the generator behind the randomized block-form checks.
pub fn make_lagrangian_invariant(a: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<SymplecticMatrix> {
    make_lagrangian_invariant_with(a, s, &Tolerances::default())
}

pub fn make_lagrangian_invariant_with(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<SymplecticMatrix> {
    let m = a.nrows();
    if m == 0 || a.ncols() != m {
        return Err(Error::BadShape {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if s.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "S must be {m}x{m}, got {:?}",
            s.shape()
        )));
    }
    let s_defect = max_abs(&(s - s.transpose()));
    if s_defect > tol.symplectic * max_abs(s).max(1.0) {
        return Err(Error::Validation(format!(
            "S deviates from symmetry by {s_defect:.3e}"
        )));
    }
    let a_inv_t = a.transpose().try_inverse().ok_or_else(|| {
        Error::Singular("A must be invertible to build a Lagrangian-invariant map".into())
    })?;
    let b = a * s;
    let mut p = DMatrix::zeros(2 * m, 2 * m);
    p.view_mut((0, 0), (m, m)).copy_from(a);
    p.view_mut((0, m), (m, m)).copy_from(&b);
    p.view_mut((m, m), (m, m)).copy_from(&a_inv_t);
    SymplecticMatrix::with_tolerances(p, tol)
}

/// Write `P` in a basis adapted to the invariant Lagrangian spanned by `e`.
///
/// The adapted basis is `[F | JF]` with `F` an orthonormal basis of the span
/// of `e`; it is both orthogonal and symplectic, so the blocks are read off
/// by plain conjugation.  Fails with [`Error::NotInvariant`] when `P` does
/// not preserve the span within [`Tolerances::block`].
pub fn lagrangian_block_form(p: &SymplecticMatrix, e: &LagrangianFrame) -> Result<BlockTriple> {
    lagrangian_block_form_with(p, e, &Tolerances::default())
}

pub fn lagrangian_block_form_with(
    p: &SymplecticMatrix,
    e: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<BlockTriple> {
    if p.dim() != e.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map acts on R^{}, frame lives in R^{}",
            p.dim(),
            e.dim()
        )));
    }
    let m = p.half_dim();
    let f = e.orthonormal_basis();
    let pf = p.matrix() * &f;
    let off_span = &pf - &f * (f.transpose() * &pf);
    let scale = max_abs(&pf).max(1.0);
    let inv_defect = max_abs(&off_span);
    if inv_defect > tol.block * scale {
        return Err(Error::NotInvariant {
            defect: inv_defect,
            tol: tol.block * scale,
        });
    }
    let j = standard_j(p.dim());
    let g = &j * &f;
    let mut basis = DMatrix::zeros(p.dim(), p.dim());
    basis.view_mut((0, 0), (p.dim(), m)).copy_from(&f);
    basis.view_mut((0, m), (p.dim(), m)).copy_from(&g);
    let p_tilde = basis.transpose() * p.matrix() * &basis;
    let lower_left = p_tilde.view((m, 0), (m, m)).into_owned();
    let ll_defect = max_abs(&lower_left);
    if ll_defect > tol.block * scale {
        return Err(Error::NotInvariant {
            defect: ll_defect,
            tol: tol.block * scale,
        });
    }
    BlockTriple::with_basis(
        p_tilde.view((0, 0), (m, m)).into_owned(),
        p_tilde.view((0, m), (m, m)).into_owned(),
        p_tilde.view((m, m), (m, m)).into_owned(),
        basis,
        tol,
    )
}

/// Parity of the Conley-Zehnder index of any path ending at `P`, read off
/// from `sign det(I - P)`:  even iff `(-1)^m sign det(I - P) = +1`.
///
/// Fails with [`Error::Degenerate`] when `|det(I - P)|` is at or below
/// [`Tolerances::degeneracy`]; degenerate maps have no well-defined parity.
pub fn det_sign_parity(p: &SymplecticMatrix) -> Result<Parity> {
    det_sign_parity_with(p, &Tolerances::default())
}

pub fn det_sign_parity_with(p: &SymplecticMatrix, tol: &Tolerances) -> Result<Parity> {
    parity_of_return_map(p.matrix(), tol.degeneracy)
}

/// Parity from `sign det(I - P)` for a matrix trusted to be symplectic.
///
/// Shared with callers that hold endpoints of validated symplectic paths,
/// where the matrix norm can be too large for the absolute symplecticity
/// tolerance even though the matrix is symplectic by construction.
pub(crate) fn parity_of_return_map(mat: &DMatrix<f64>, degeneracy: f64) -> Result<Parity> {
    let n = mat.nrows();
    if n % 2 != 0 || n == 0 || mat.ncols() != n {
        return Err(Error::BadShape {
            rows: n,
            cols: mat.ncols(),
        });
    }
    let m = n / 2;
    let d = (DMatrix::identity(n, n) - mat).determinant();
    if d.abs() <= degeneracy {
        return Err(Error::Degenerate(d.abs()));
    }
    let signed = if m % 2 == 0 { d } else { -d };
    Ok(if signed > 0.0 {
        Parity::Even
    } else {
        Parity::Odd
    })
}

/// Evaluate both sides of the determinant chain
/// `det(I - P) = (det A)^{-1} det(I - A)^2 (-1)^m` and return the relative
/// discrepancy `|lhs - rhs| / max(|lhs|, |rhs|, 1e-300)`.
pub fn det_chain_check(p: &SymplecticMatrix, e: &LagrangianFrame) -> Result<f64> {
    det_chain_check_with(p, e, &Tolerances::default())
}

pub fn det_chain_check_with(
    p: &SymplecticMatrix,
    e: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<f64> {
    let triple = lagrangian_block_form_with(p, e, tol)?;
    let n = p.dim();
    let m = p.half_dim();
    let lhs = (DMatrix::identity(n, n) - p.matrix()).determinant();
    if lhs.abs() <= tol.degeneracy {
        return Err(Error::Degenerate(lhs.abs()));
    }
    let det_a = triple.a().determinant();
    if det_a == 0.0 {
        return Err(Error::Singular("A block is singular".into()));
    }
    let det_i_a = (DMatrix::identity(m, m) - triple.a()).determinant();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = det_i_a * det_i_a / det_a * sign;
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cat_a() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn standard_j_squares_to_minus_identity() {
        for dim in [2, 4, 6] {
            let j = standard_j(dim);
            let jj = &j * &j;
            assert_abs_diff_eq!(jj, -DMatrix::identity(dim, dim), epsilon = 0.0);
        }
    }

    #[test]
    fn rotation_is_symplectic_shear_is_not_rejected() {
        let theta = 0.7_f64;
        let rot = DMatrix::from_row_slice(
            2,
            2,
            &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
        );
        assert!(is_symplectic(&rot, 1e-12).unwrap());
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 0.0, 1.0]);
        assert!(is_symplectic(&shear, 1e-12).unwrap());
    }

    #[test]
    fn volume_preserving_but_not_symplectic_in_dim_4() {
        // det = 1 but the form is not preserved: swap the two q coordinates
        // against scaling, pairing q1 with p2.
        let mut mat = DMatrix::identity(4, 4);
        mat[(0, 0)] = 2.0;
        mat[(3, 3)] = 0.5;
        assert_abs_diff_eq!(mat.determinant(), 1.0, epsilon = 1e-12);
        assert!(!is_symplectic(&mat, 1e-9).unwrap());
        assert!(SymplecticMatrix::new(mat).is_err());
    }

    #[test]
    fn odd_dimension_is_a_shape_error() {
        let mat = DMatrix::identity(3, 3);
        assert!(matches!(
            is_symplectic(&mat, 1e-9),
            Err(Error::BadShape { rows: 3, cols: 3 })
        ));
    }

    #[test]
    fn symplectic_inverse_matches_true_inverse() {
        let p = make_lagrangian_invariant(
            &cat_a(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
        )
        .unwrap();
        let inv = p.inverse();
        let prod = p.matrix() * inv.matrix();
        assert!(max_abs(&(prod - DMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn coordinate_frame_is_lagrangian_and_graph_of_symmetric_is_too() {
        LagrangianFrame::coordinate(4).unwrap();
        // Graph frame [I; S] with S symmetric is Lagrangian.
        let f = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0, -1.0]);
        LagrangianFrame::new(f).unwrap();
    }

    #[test]
    fn non_isotropic_frame_is_rejected_with_defect() {
        // Columns e1, e3 pair to w = -1.
        let f = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        match LagrangianFrame::new(f) {
            Err(Error::NotIsotropic { defect, .. }) => assert_abs_diff_eq!(defect, 1.0),
            other => panic!("expected NotIsotropic, got {other:?}"),
        }
    }

    #[test]
    fn rank_deficient_frame_is_rejected() {
        let f = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(LagrangianFrame::new(f), Err(Error::Singular(_))));
    }

    #[test]
    fn ill_conditioned_frame_is_rejected() {
        let f = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1e-9, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(LagrangianFrame::new(f), Err(Error::Singular(_))));
    }

    #[test]
    fn orthonormal_basis_of_coordinate_frame_is_exact() {
        let e = LagrangianFrame::coordinate(4).unwrap();
        let q = e.orthonormal_basis();
        let mut expect = DMatrix::zeros(4, 2);
        expect[(0, 0)] = 1.0;
        expect[(1, 1)] = 1.0;
        assert_abs_diff_eq!(q, expect, epsilon = 0.0);
    }

    #[test]
    fn cat_block_form_round_trips() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let p = make_lagrangian_invariant(&cat_a(), &s).unwrap();
        // B = A S and C = (A^T)^{-1}, computed by hand.
        let b_expect = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 1.0, 2.0]);
        let c_expect = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]);
        let e = LagrangianFrame::coordinate(4).unwrap();
        let triple = lagrangian_block_form(&p, &e).unwrap();
        assert!(max_abs(&(triple.a() - cat_a())) < 1e-12);
        assert!(max_abs(&(triple.b() - b_expect)) < 1e-12);
        assert!(max_abs(&(triple.c() - c_expect)) < 1e-12);
        assert!(max_abs(&(triple.conjugated() - p.matrix())) < 1e-12);
    }

    #[test]
    fn block_form_rejects_a_non_invariant_subspace() {
        // A rotation by pi/2 in each symplectic plane maps the coordinate
        // Lagrangian onto its complement.
        let theta = std::f64::consts::FRAC_PI_2;
        let mut rot = DMatrix::zeros(4, 4);
        for i in 0..2 {
            rot[(i, i)] = theta.cos();
            rot[(i, 2 + i)] = -theta.sin();
            rot[(2 + i, i)] = theta.sin();
            rot[(2 + i, 2 + i)] = theta.cos();
        }
        let p = SymplecticMatrix::new(rot).unwrap();
        let e = LagrangianFrame::coordinate(4).unwrap();
        assert!(matches!(
            lagrangian_block_form(&p, &e),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn det_sign_parity_matches_hand_values() {
        let hyp = SymplecticMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[2.0, 0.0, 0.0, 0.5],
        ))
        .unwrap();
        assert_eq!(det_sign_parity(&hyp).unwrap(), Parity::Even);

        let neg_hyp = SymplecticMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[-2.0, 0.0, 0.0, -0.5],
        ))
        .unwrap();
        assert_eq!(det_sign_parity(&neg_hyp).unwrap(), Parity::Odd);

        let theta = std::f64::consts::FRAC_PI_3;
        let rot = SymplecticMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
        ))
        .unwrap();
        assert_eq!(det_sign_parity(&rot).unwrap(), Parity::Odd);
    }

    #[test]
    fn det_sign_parity_rejects_degenerate_maps() {
        let id = SymplecticMatrix::identity(2).unwrap();
        assert!(matches!(det_sign_parity(&id), Err(Error::Degenerate(_))));
        // A shear fixes a vector, so det(I - P) = 0 as well.
        let shear =
            SymplecticMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(matches!(det_sign_parity(&shear), Err(Error::Degenerate(_))));
    }

    #[test]
    fn det_chain_on_the_hyperbolic_example() {
        let p = SymplecticMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[2.0, 0.0, 0.0, 0.5],
        ))
        .unwrap();
        let e = LagrangianFrame::coordinate(2).unwrap();
        // Both sides equal -1/2 by hand.
        let n = p.dim();
        let lhs = (DMatrix::identity(n, n) - p.matrix()).determinant();
        assert_abs_diff_eq!(lhs, -0.5, epsilon = 1e-12);
        let rel = det_chain_check(&p, &e).unwrap();
        assert!(rel < 1e-12, "relative error {rel}");
    }

    #[test]
    fn det_chain_on_the_identity_is_degenerate() {
        let p = SymplecticMatrix::identity(4).unwrap();
        let e = LagrangianFrame::coordinate(4).unwrap();
        assert!(matches!(
            det_chain_check(&p, &e),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn cat_suspension_block_has_positive_det_a_and_even_parity() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        let p = make_lagrangian_invariant(&cat_a(), &s).unwrap();
        let e = LagrangianFrame::coordinate(4).unwrap();
        let triple = lagrangian_block_form(&p, &e).unwrap();
        assert!(triple.a().determinant() > 0.0);
        assert_eq!(det_sign_parity(&p).unwrap(), Parity::Even);
        let rel = det_chain_check(&p, &e).unwrap();
        assert!(rel < 1e-10);
    }

    #[test]
    fn block_triple_validates_its_identities() {
        // C deviating from (A^T)^{-1} must be rejected.
        let a = cat_a();
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 1.0, 2.0]);
        let c_bad = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.1]);
        assert!(matches!(
            BlockTriple::new(a.clone(), b, c_bad),
            Err(Error::Validation(_))
        ));
        // B with A^{-1} B asymmetric must be rejected.
        let b_bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]);
        assert!(matches!(
            BlockTriple::new(a, b_bad, c),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn make_lagrangian_invariant_rejects_bad_inputs() {
        let a = cat_a();
        let s_asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            make_lagrangian_invariant(&a, &s_asym),
            Err(Error::Validation(_))
        ));
        let a_sing = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = DMatrix::zeros(2, 2);
        assert!(matches!(
            make_lagrangian_invariant(&a_sing, &s),
            Err(Error::Singular(_))
        ));
    }
}
