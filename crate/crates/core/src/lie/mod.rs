//! Matrix Lie algebras and groups: brackets, exponentials, adjoint action,
//! stabilizer subalgebras and intersections.
//!
//! Complex algebras live in the doubled real representation (see
//! [`crate::linalg::complex_to_real`]); every element is a real square matrix.

mod classical;
mod expm;
mod repr;
pub mod three_form;

pub use classical::{
    general_linear, orthogonal, special_linear, special_linear_complex, special_unitary,
    strictly_lower_block_mask, unitary, AlgebraTag,
};
pub use expm::{expm, logm};
pub use repr::Representation;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Residual below which an element is accepted as a member of its algebra.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Residual below which a matrix is accepted as a member of its group.
pub const GROUP_TOL: f64 = 1e-9;
/// Bracket-closure residual accepted for computed subalgebras.
pub const CLOSURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub matrix: DMatrix<f64>,
    pub tag: AlgebraTag,
}

impl AlgebraElement {
    /// Checks membership in `tag` to [`MEMBERSHIP_TOL`] (relative to the norm).
    pub fn new(matrix: DMatrix<f64>, tag: AlgebraTag) -> Result<Self> {
        let r = tag.algebra_residual(&matrix)?;
        if r > MEMBERSHIP_TOL * matrix.norm().max(1.0) {
            return Err(Error::NumericalError(format!(
                "element not in {} (residual {r:.3e})",
                tag.name()
            )));
        }
        Ok(AlgebraElement { matrix, tag })
    }

    pub fn unchecked(matrix: DMatrix<f64>, tag: AlgebraTag) -> Self {
        AlgebraElement { matrix, tag }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: DMatrix<f64>,
    pub tag: AlgebraTag,
}

impl GroupElement {
    pub fn new(matrix: DMatrix<f64>, tag: AlgebraTag) -> Result<Self> {
        let r = tag.group_residual(&matrix)?;
        if r > GROUP_TOL * matrix.norm().max(1.0).powi(2) {
            return Err(Error::NumericalError(format!(
                "matrix not in the group of {} (residual {r:.3e})",
                tag.name()
            )));
        }
        Ok(GroupElement { matrix, tag })
    }

    pub fn identity(n: usize, tag: AlgebraTag) -> Self {
        GroupElement { matrix: DMatrix::identity(n, n), tag }
    }

    pub fn unchecked(matrix: DMatrix<f64>, tag: AlgebraTag) -> Self {
        GroupElement { matrix, tag }
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { matrix: &self.matrix * &other.matrix, tag: self.tag.clone() }
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let inv = checked_inverse(&self.matrix)?;
        Ok(GroupElement { matrix: inv, tag: self.tag.clone() })
    }
}

/// Inverse with a conditioning guard.
pub fn checked_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 1e-13 * smax || smax == 0.0 {
        return Err(Error::NumericalError(format!("singular matrix (condition {:.3e})", smax / smin)));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalError("singular matrix".into()))
}

pub fn bracket(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    if a.matrix.shape() != b.matrix.shape() {
        return Err(Error::DimensionError(format!(
            "bracket of {:?} and {:?}",
            a.matrix.shape(),
            b.matrix.shape()
        )));
    }
    Ok(AlgebraElement {
        matrix: commutator(&a.matrix, &b.matrix),
        tag: a.tag.clone(),
    })
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// `exp(A)`, verified by `||exp(A) exp(-A) - I|| < tol`.
pub fn exponential(a: &AlgebraElement, tol: f64) -> Result<GroupElement> {
    if a.matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalError("non-finite algebra element".into()));
    }
    let g = expm(&a.matrix);
    let gi = expm(&(-&a.matrix));
    let n = a.dim();
    let scale = g.norm() * gi.norm() / n as f64;
    let r = (&g * &gi - DMatrix::identity(n, n)).norm();
    if r > tol * scale.max(1.0) {
        return Err(Error::NumericalError(format!("exp inversion residual {r:.3e}")));
    }
    Ok(GroupElement { matrix: g, tag: a.tag.clone() })
}

/// `Ad(g) A = g A g^{-1}`.
pub fn adjoint(g: &GroupElement, a: &AlgebraElement) -> Result<AlgebraElement> {
    if g.matrix.shape() != a.matrix.shape() {
        return Err(Error::DimensionError("adjoint shape mismatch".into()));
    }
    let gi = checked_inverse(&g.matrix)?;
    Ok(AlgebraElement { matrix: &g.matrix * &a.matrix * gi, tag: a.tag.clone() })
}

/// Finite basis of a matrix Lie (sub)algebra, orthonormal in the Frobenius
/// inner product.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    pub elements: Vec<DMatrix<f64>>,
    pub tag: AlgebraTag,
    /// Matrix size of the elements.
    pub size: usize,
}

impl AlgebraBasis {
    /// Orthonormalizes an arbitrary spanning set (rank threshold 1e-10).
    pub fn from_spanning(spanning: &[DMatrix<f64>], size: usize, tag: AlgebraTag) -> Self {
        Self::from_spanning_with_tol(spanning, size, tag, 1e-10)
    }

    pub fn from_spanning_with_tol(
        spanning: &[DMatrix<f64>],
        size: usize,
        tag: AlgebraTag,
        rel_tol: f64,
    ) -> Self {
        if spanning.is_empty() {
            return AlgebraBasis { elements: vec![], tag, size };
        }
        let cols: Vec<DVector<f64>> = spanning.iter().map(linalg::flatten).collect();
        let span = linalg::column_span(&DMatrix::from_columns(&cols), rel_tol);
        let elements = span
            .column_iter()
            .map(|c| linalg::unflatten(&c.into_owned(), size, size))
            .collect();
        AlgebraBasis { elements, tag, size }
    }

    pub fn empty(size: usize, tag: AlgebraTag) -> Self {
        AlgebraBasis { elements: vec![], tag, size }
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Flattened elements as the columns of a `size^2 x dim` matrix.
    pub fn as_columns(&self) -> DMatrix<f64> {
        if self.elements.is_empty() {
            return DMatrix::zeros(self.size * self.size, 0);
        }
        let cols: Vec<DVector<f64>> = self.elements.iter().map(linalg::flatten).collect();
        DMatrix::from_columns(&cols)
    }

    /// Orthogonal projection of `m` onto the span.
    pub fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.size, self.size);
        for e in &self.elements {
            p += e * linalg::frobenius(e, m);
        }
        p
    }

    /// Norm of the component of `m` orthogonal to the span.
    pub fn residual(&self, m: &DMatrix<f64>) -> f64 {
        (m - self.project(m)).norm()
    }

    pub fn element(&self, i: usize) -> AlgebraElement {
        AlgebraElement::unchecked(self.elements[i].clone(), self.tag.clone())
    }

    /// Linear combination `sum c_i e_i`.
    pub fn combine(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (c, e) in coeffs.iter().zip(&self.elements) {
            m += e * *c;
        }
        m
    }

    /// Largest residual of `[e_i, e_j]` off the span.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.elements.len() {
            for j in i + 1..self.elements.len() {
                let c = commutator(&self.elements[i], &self.elements[j]);
                worst = worst.max(self.residual(&c));
            }
        }
        worst
    }

    pub fn is_closed(&self) -> bool {
        self.closure_residual() < CLOSURE_TOL
    }

    /// Whether the two bases span the same subspace.
    pub fn same_span(&self, other: &AlgebraBasis, tol: f64) -> bool {
        self.dim() == other.dim()
            && other.elements.iter().all(|e| self.residual(e) < tol)
            && self.elements.iter().all(|e| other.residual(e) < tol)
    }

    pub fn dump(&self) -> BasisDump {
        BasisDump {
            algebra: self.tag.name(),
            size: self.size,
            dimension: self.dim(),
            closure_residual: self.closure_residual(),
            elements: self
                .elements
                .iter()
                .map(|e| (0..self.size).map(|i| e.row(i).iter().copied().collect()).collect())
                .collect(),
        }
    }
}

/// JSON dump of a basis (row-major element matrices).
#[derive(Debug, Clone, Serialize)]
pub struct BasisDump {
    pub algebra: String,
    pub size: usize,
    pub dimension: usize,
    pub closure_residual: f64,
    pub elements: Vec<Vec<Vec<f64>>>,
}

/// Basis of `{A in algebra : A . v = 0}` where `action(A)` computes `A . v`.
///
/// The result is the SVD nullspace of the stacked linear system (threshold
/// 1e-8 relative to the largest singular value), orthonormalized.
pub fn stabilizer_algebra<F>(algebra: &AlgebraBasis, action: F) -> AlgebraBasis
where
    F: Fn(&DMatrix<f64>) -> DVector<f64>,
{
    if algebra.dim() == 0 {
        return algebra.clone();
    }
    let images: Vec<DVector<f64>> = algebra.elements.iter().map(&action).collect();
    let system = DMatrix::from_columns(&images);
    if system.norm() == 0.0 {
        return algebra.clone();
    }
    let ns = linalg::nullspace(&system, linalg::NULLSPACE_REL_TOL);
    let spanning: Vec<DMatrix<f64>> = ns
        .column_iter()
        .map(|c| algebra.combine(c.as_slice()))
        .collect();
    AlgebraBasis::from_spanning(&spanning, algebra.size, algebra.tag.clone())
}

/// Stabilizer of `v` under a tensor representation.
pub fn stabilizer_of(algebra: &AlgebraBasis, rep: &Representation, v: &DVector<f64>) -> AlgebraBasis {
    stabilizer_algebra(algebra, |a| rep.act(a, v))
}

/// Basis of `span(a) ∩ span(b)`.
pub fn intersect_algebras(a: &AlgebraBasis, b: &AlgebraBasis) -> Result<AlgebraBasis> {
    if a.size != b.size {
        return Err(Error::DimensionError(format!("intersect {} vs {}", a.size, b.size)));
    }
    if a.dim() == 0 || b.dim() == 0 {
        return Ok(AlgebraBasis::empty(a.size, a.tag.clone()));
    }
    let ca = a.as_columns();
    let cb = b.as_columns();
    let mut stacked = DMatrix::zeros(ca.nrows(), a.dim() + b.dim());
    stacked.view_mut((0, 0), ca.shape()).copy_from(&ca);
    stacked.view_mut((0, a.dim()), cb.shape()).copy_from(&(-&cb));
    let ns = linalg::nullspace(&stacked, linalg::NULLSPACE_REL_TOL);
    let spanning: Vec<DMatrix<f64>> = ns
        .column_iter()
        .map(|c| a.combine(&c.as_slice()[..a.dim()]))
        .collect();
    let inter = AlgebraBasis::from_spanning(&spanning, a.size, a.tag.clone());
    let sum_dim = linalg::rank(&stacked, linalg::NULLSPACE_REL_TOL, 0.0);
    if a.dim() + b.dim() != sum_dim + inter.dim() {
        return Err(Error::NumericalError(format!(
            "dimension formula violated: {} + {} != {} + {}",
            a.dim(),
            b.dim(),
            sum_dim,
            inter.dim()
        )));
    }
    Ok(inter)
}

#[cfg(test)]
mod tests;
