//! Angles between vectors and linear subspaces of R^n, with orthogonal
//! projections.
//!
//! The subspace angle `L1 ∠ L2 = max_{u in L1, u != 0} angle(u, proj_{L2} u)`
//! is computed as `arccos` of the smallest singular value of an orthonormal
//! basis of `L1` projected onto `L2`. It is asymmetric in general: in R^3
//! with `L1 = span{(0,1,1)}` and `L2 = {x3 = 0}` one has `L1 ∠ L2 = pi/4`
//! while `L2 ∠ L1 = pi/2`.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::FRAC_PI_2;

use crate::error::{CoreError, Result};

/// Relative tolerance on singular values for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// A linear subspace of R^n, stored with its original spanning set and a
/// cached orthonormal basis (columns of `ortho`).
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<DVector<f64>>,
    ortho: DMatrix<f64>,
}

impl Subspace {
    /// Builds a subspace from a spanning set. Rank and orthonormalization go
    /// through column-pivoted QR with relative tolerance [`RANK_TOL`].
    pub fn new(ambient_dim: usize, basis: Vec<DVector<f64>>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(CoreError::InvalidArgument("ambient dimension must be positive".into()));
        }
        if basis.is_empty() {
            return Err(CoreError::InvalidArgument("spanning set must be nonempty".into()));
        }
        for v in &basis {
            if v.len() != ambient_dim {
                return Err(CoreError::DimensionMismatch { expected: ambient_dim, got: v.len() });
            }
            if v.norm() == 0.0 {
                return Err(CoreError::InvalidArgument("spanning set contains a zero vector".into()));
            }
        }
        let ortho = orthonormalize(ambient_dim, &basis);
        if ortho.ncols() == 0 {
            return Err(CoreError::RankDeficient { rank: 0, expected: 1 });
        }
        Ok(Self { ambient_dim, basis, ortho })
    }

    /// Subspace spanned by the rows of an integer matrix.
    pub fn from_integer_rows(ambient_dim: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let basis = rows
            .iter()
            .map(|r| DVector::from_iterator(ambient_dim, r.iter().map(|&x| x as f64)))
            .collect();
        Self::new(ambient_dim, basis)
    }

    fn from_orthonormal(ambient_dim: usize, ortho: DMatrix<f64>) -> Self {
        let basis = (0..ortho.ncols()).map(|c| ortho.column(c).into_owned()).collect();
        Self { ambient_dim, basis, ortho }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension `m = rank(basis)`, with `1 <= m <= n`.
    pub fn dim(&self) -> usize {
        self.ortho.ncols()
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Orthonormal basis as columns of an `n x m` matrix.
    pub fn orthonormal_basis(&self) -> &DMatrix<f64> {
        &self.ortho
    }

    /// Orthogonal projection `pi_L v`.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.ortho * (self.ortho.transpose() * v)
    }

    /// Orthogonal complement `L^perp`; `None` when `L = R^n`.
    pub fn complement(&self) -> Option<Subspace> {
        let n = self.ambient_dim;
        let m = self.dim();
        if m == n {
            return None;
        }
        // Residuals of the standard basis against L span the complement.
        let mut residuals = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            residuals.push(&e - self.project(&e));
        }
        let ortho = orthonormalize(n, &residuals);
        debug_assert_eq!(ortho.ncols(), n - m);
        Some(Subspace::from_orthonormal(n, ortho))
    }

    /// True when `v` lies in the subspace within `tol` (relative to `|v|`).
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let nv = v.norm();
        if nv == 0.0 {
            return true;
        }
        (v - self.project(v)).norm() <= tol * nv
    }
}

/// Orthonormal basis of the span of `vectors`, via column-pivoted QR with
/// relative rank tolerance [`RANK_TOL`] on the R diagonal. Returns an
/// `n x rank` matrix (possibly 0 columns).
fn orthonormalize(ambient_dim: usize, vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let mut mat = DMatrix::zeros(ambient_dim, vectors.len());
    for (c, v) in vectors.iter().enumerate() {
        mat.set_column(c, v);
    }
    let (q, r, _) = mat.col_piv_qr().unpack();
    let diag: Vec<f64> = (0..q.ncols().min(r.nrows()))
        .map(|i| r[(i, i)].abs())
        .collect();
    let rmax = diag.iter().cloned().fold(0.0, f64::max);
    if rmax == 0.0 {
        return DMatrix::zeros(ambient_dim, 0);
    }
    // pivoting puts the diagonal in decreasing magnitude; count the
    // significant leading block
    let rank = diag.iter().take_while(|&&d| d > RANK_TOL * rmax).count();
    q.columns(0, rank).into_owned()
}

/// Angle between two vectors, in `[0, pi]`. By convention the angle is `pi/2`
/// when either vector is zero.
pub fn vector_angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return FRAC_PI_2;
    }
    // atan2 of the chord lengths is stable where acos of the cosine loses
    // half the significand (angles near 0 and pi).
    let a = u.unscale(nu);
    let b = v.unscale(nv);
    2.0 * (&a - &b).norm().atan2((&a + &b).norm())
}

/// Angle between subspaces, `max_{u in L1, u != 0} angle(u, proj_{L2} u)`,
/// in `[0, pi/2]`.
///
/// Returns exactly `pi/2` when `L1` meets `L2^perp` nontrivially (smallest
/// singular value below [`RANK_TOL`]).
pub fn subspace_angle(l1: &Subspace, l2: &Subspace) -> Result<f64> {
    if l1.ambient_dim() != l2.ambient_dim() {
        return Err(CoreError::DimensionMismatch {
            expected: l1.ambient_dim(),
            got: l2.ambient_dim(),
        });
    }
    if l1.dim() > l2.dim() {
        // A dimension excess forces L1 to meet L2^perp.
        return Ok(FRAC_PI_2);
    }
    // Cosines of the principal angles are the singular values of Q2^T Q1.
    let overlap = l2.orthonormal_basis().transpose() * l1.orthonormal_basis();
    let svd = overlap.svd(false, false);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < RANK_TOL {
        return Ok(FRAC_PI_2);
    }
    Ok(smin.clamp(-1.0, 1.0).acos())
}
