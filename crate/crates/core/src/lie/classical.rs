//! Classical matrix algebras in their defining (or doubled real) representation.

use nalgebra::{Complex, DMatrix};
use serde::{Serialize, Serializer};

use super::AlgebraBasis;
use crate::error::{Error, Result};
use crate::forms::{Form, HermitianForm, SymmetricForm};
use crate::linalg::{self, complex_structure, complex_to_real, real_to_complex};

/// Identifies the ambient algebra of a matrix element.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraTag {
    GeneralLinear(usize),
    SpecialLinear(usize),
    /// `so(S) = {A : A^T S + S A = 0}`.
    Orthogonal(SymmetricForm),
    /// `sl(n, C)` as a real algebra of `2n x 2n` matrices.
    SpecialLinearComplex(usize),
    /// `u(H)` in the doubled real representation.
    Unitary(HermitianForm),
    /// `su(H)` in the doubled real representation.
    SpecialUnitary(HermitianForm),
}

impl Serialize for AlgebraTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl AlgebraTag {
    pub fn name(&self) -> String {
        match self {
            AlgebraTag::GeneralLinear(n) => format!("gl({n},R)"),
            AlgebraTag::SpecialLinear(n) => format!("sl({n},R)"),
            AlgebraTag::Orthogonal(f) => {
                let s = f.signature();
                format!("so({},{})", s.positive, s.negative)
            }
            AlgebraTag::SpecialLinearComplex(n) => format!("sl({n},C)"),
            AlgebraTag::Unitary(f) => {
                let s = f.signature();
                format!("u({},{})", s.positive, s.negative)
            }
            AlgebraTag::SpecialUnitary(f) => {
                let s = f.signature();
                format!("su({},{})", s.positive, s.negative)
            }
        }
    }

    /// Size of the (real) matrices in this algebra.
    pub fn size(&self) -> usize {
        match self {
            AlgebraTag::GeneralLinear(n) | AlgebraTag::SpecialLinear(n) => *n,
            AlgebraTag::Orthogonal(f) => f.dim(),
            AlgebraTag::SpecialLinearComplex(n) => 2 * n,
            AlgebraTag::Unitary(f) | AlgebraTag::SpecialUnitary(f) => f.real_matrix().nrows(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(
            self,
            AlgebraTag::SpecialLinearComplex(_) | AlgebraTag::Unitary(_) | AlgebraTag::SpecialUnitary(_)
        )
    }

    fn check_shape(&self, m: &DMatrix<f64>) -> Result<()> {
        let n = self.size();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionError(format!(
                "{} expects {n}x{n}, got {}x{}",
                self.name(),
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }

    /// Sum of the defining-relation residuals of the Lie algebra.
    pub fn algebra_residual(&self, a: &DMatrix<f64>) -> Result<f64> {
        self.check_shape(a)?;
        Ok(match self {
            AlgebraTag::GeneralLinear(_) => 0.0,
            AlgebraTag::SpecialLinear(_) => a.trace().abs(),
            AlgebraTag::Orthogonal(f) => skew_residual(a, f.matrix()),
            AlgebraTag::SpecialLinearComplex(_) => {
                let (re, im) = real_to_complex(a);
                j_residual(a) + re.trace().abs() + im.trace().abs()
            }
            AlgebraTag::Unitary(f) => j_residual(a) + skew_residual(a, f.real_matrix()),
            AlgebraTag::SpecialUnitary(f) => {
                let (re, im) = real_to_complex(a);
                j_residual(a) + skew_residual(a, f.real_matrix()) + re.trace().abs() + im.trace().abs()
            }
        })
    }

    /// Sum of the defining-relation residuals of the group.
    pub fn group_residual(&self, g: &DMatrix<f64>) -> Result<f64> {
        self.check_shape(g)?;
        Ok(match self {
            AlgebraTag::GeneralLinear(_) => {
                if g.determinant() == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            AlgebraTag::SpecialLinear(_) => (g.determinant() - 1.0).abs(),
            AlgebraTag::Orthogonal(f) => (g.transpose() * f.matrix() * g - f.matrix()).norm(),
            AlgebraTag::SpecialLinearComplex(_) => j_residual(g) + (complex_det(g) - 1.0).norm(),
            AlgebraTag::Unitary(f) => {
                let h = f.real_matrix();
                j_residual(g) + (g.transpose() * h * g - h).norm()
            }
            AlgebraTag::SpecialUnitary(f) => {
                let h = f.real_matrix();
                j_residual(g) + (g.transpose() * h * g - h).norm() + (complex_det(g) - 1.0).norm()
            }
        })
    }

    /// Orthonormal basis of the full algebra.
    pub fn basis(&self) -> AlgebraBasis {
        match self {
            AlgebraTag::GeneralLinear(n) => general_linear(*n),
            AlgebraTag::SpecialLinear(n) => special_linear(*n),
            AlgebraTag::Orthogonal(f) => orthogonal(f),
            AlgebraTag::SpecialLinearComplex(n) => special_linear_complex(*n),
            AlgebraTag::Unitary(f) => unitary(f),
            AlgebraTag::SpecialUnitary(f) => special_unitary(f),
        }
    }
}

fn skew_residual(a: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    (a.transpose() * s + s * a).norm()
}

fn j_residual(a: &DMatrix<f64>) -> f64 {
    let j = complex_structure(a.nrows() / 2);
    (a * &j - &j * a).norm()
}

/// Complex determinant of a complex-linear real `2n x 2n` matrix.
pub(crate) fn complex_det(g: &DMatrix<f64>) -> Complex<f64> {
    let (re, im) = real_to_complex(g);
    let n = re.nrows();
    DMatrix::from_fn(n, n, |i, k| Complex::new(re[(i, k)], im[(i, k)])).determinant()
}

fn unit(n: usize, i: usize, k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, k)] = 1.0;
    m
}

pub fn general_linear(n: usize) -> AlgebraBasis {
    let els: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |k| unit(n, i, k))).collect();
    AlgebraBasis::from_spanning(&els, n, AlgebraTag::GeneralLinear(n))
}

fn traceless_spanning(n: usize) -> Vec<DMatrix<f64>> {
    let mut els = Vec::new();
    for i in 0..n {
        for k in 0..n {
            if i != k {
                els.push(unit(n, i, k));
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        els.push(unit(n, i, i) - unit(n, i + 1, i + 1));
    }
    els
}

pub fn special_linear(n: usize) -> AlgebraBasis {
    AlgebraBasis::from_spanning(&traceless_spanning(n), n, AlgebraTag::SpecialLinear(n))
}

/// `so(S)` as `S^{-1} K` for antisymmetric `K`.
pub fn orthogonal(form: &SymmetricForm) -> AlgebraBasis {
    let n = form.dim();
    let tag = AlgebraTag::Orthogonal(form.clone());
    let Some(sinv) = form.matrix().clone().try_inverse() else {
        // Degenerate forms: fall back to the nullspace of A -> A^T S + S A.
        let s = form.matrix().clone();
        return super::stabilizer_algebra(&general_linear(n), |a| {
            linalg::flatten(&(a.transpose() * &s + &s * a))
        })
        .retag(tag);
    };
    let mut els = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            els.push(&sinv * (unit(n, i, k) - unit(n, k, i)));
        }
    }
    AlgebraBasis::from_spanning(&els, n, tag)
}

pub fn special_linear_complex(n: usize) -> AlgebraBasis {
    let zero = DMatrix::zeros(n, n);
    let mut els = Vec::new();
    for e in traceless_spanning(n) {
        els.push(complex_to_real(&e, &zero));
        els.push(complex_to_real(&zero, &e));
    }
    AlgebraBasis::from_spanning(&els, 2 * n, AlgebraTag::SpecialLinearComplex(n))
}

/// `u(H)` as `H^{-1} K` for skew-Hermitian `K`.
pub fn unitary(form: &HermitianForm) -> AlgebraBasis {
    let h = form.real_matrix().clone();
    let size = h.nrows();
    let n = size / 2;
    let hinv = h.try_inverse().expect("unitary algebra needs a nondegenerate form");
    let zero = DMatrix::zeros(n, n);
    let mut els = Vec::new();
    for i in 0..n {
        for k in i..n {
            if i != k {
                let anti = unit(n, i, k) - unit(n, k, i);
                els.push(&hinv * complex_to_real(&anti, &zero));
            }
            let sym = unit(n, i, k) + unit(n, k, i);
            els.push(&hinv * complex_to_real(&zero, &sym));
        }
    }
    AlgebraBasis::from_spanning(&els, size, AlgebraTag::Unitary(form.clone()))
}

pub fn special_unitary(form: &HermitianForm) -> AlgebraBasis {
    let u = unitary(form);
    super::stabilizer_algebra(&u, |a| {
        let (re, im) = real_to_complex(a);
        nalgebra::DVector::from_vec(vec![re.trace(), im.trace()])
    })
    .retag(AlgebraTag::SpecialUnitary(form.clone()))
}

/// Mask with ones on the strictly block-lower part for the given block
/// sizes. With `complex` the mask is doubled onto the real representation.
pub fn strictly_lower_block_mask(blocks: &[usize], complex: bool) -> DMatrix<f64> {
    let n: usize = blocks.iter().sum();
    let block_of: Vec<usize> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, &len)| std::iter::repeat_n(b, len))
        .collect();
    let base = DMatrix::from_fn(n, n, |i, k| if block_of[i] > block_of[k] { 1.0 } else { 0.0 });
    if complex {
        complex_to_real(&base, &base)
    } else {
        base
    }
}

impl AlgebraBasis {
    pub(crate) fn retag(mut self, tag: AlgebraTag) -> Self {
        self.tag = tag;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_dimensions() {
        assert_eq!(general_linear(3).dim(), 9);
        assert_eq!(special_linear(4).dim(), 15);
        assert_eq!(orthogonal(&SymmetricForm::standard(3, 2)).dim(), 10);
        assert_eq!(special_linear_complex(3).dim(), 16);
        assert_eq!(unitary(&HermitianForm::standard(2, 1)).dim(), 9);
        assert_eq!(special_unitary(&HermitianForm::standard(2, 1)).dim(), 8);
    }

    #[test]
    fn basis_elements_satisfy_relations() {
        let tags = [
            AlgebraTag::SpecialLinear(3),
            AlgebraTag::Orthogonal(SymmetricForm::standard(2, 2)),
            AlgebraTag::SpecialLinearComplex(2),
            AlgebraTag::SpecialUnitary(HermitianForm::standard(1, 2)),
        ];
        for tag in tags {
            let b = tag.basis();
            for e in &b.elements {
                assert!(tag.algebra_residual(e).unwrap() < 1e-12, "{}", tag.name());
            }
            assert!(b.is_closed());
        }
    }

    #[test]
    fn mask_complex_doubling() {
        let m = strictly_lower_block_mask(&[1, 1], true);
        assert_eq!(m[(1, 0)], 1.0);
        assert_eq!(m[(3, 2)], 1.0);
        assert_eq!(m[(3, 0)], 1.0);
        assert_eq!(m[(0, 1)], 0.0);
    }
}
