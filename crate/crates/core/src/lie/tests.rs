use super::three_form::{compact_g2_form, split_g2_form};
use super::*;
use crate::forms::{HermitianForm, SymmetricForm};
use proptest::prelude::*;

fn so3_generators() -> [AlgebraElement; 3] {
    let tag = AlgebraTag::Orthogonal(SymmetricForm::standard(3, 0));
    let l = |i: usize, k: usize| {
        let mut m = DMatrix::zeros(3, 3);
        m[(i, k)] = -1.0;
        m[(k, i)] = 1.0;
        AlgebraElement::new(m, tag.clone()).unwrap()
    };
    [l(1, 2), l(2, 0), l(0, 1)]
}

#[test]
fn so3_bracket_relation() {
    let [l1, l2, l3] = so3_generators();
    assert_eq!(bracket(&l1, &l2).unwrap().matrix, l3.matrix);
    assert_eq!(bracket(&l1, &l1).unwrap().matrix, DMatrix::zeros(3, 3));
}

#[test]
fn bracket_rejects_shape_mismatch() {
    let a = AlgebraElement::unchecked(DMatrix::zeros(2, 2), AlgebraTag::GeneralLinear(2));
    let b = AlgebraElement::unchecked(DMatrix::zeros(3, 3), AlgebraTag::GeneralLinear(3));
    assert!(matches!(bracket(&a, &b), Err(Error::DimensionError(_))));
}

/// `[[Y1, Y2], Z] = <Y1, Z> Y2 - <Y2, Z> Y1` for the translation part of
/// `so(p, q)` written as `[[0, -Y^T I], [Y, 0]]`.
#[test]
fn translation_bracket_identity() {
    let inner = crate::linalg::diag_pq(2, 1);
    let n = 3;
    let embed = |y: &DVector<f64>| {
        let mut m = DMatrix::zeros(n + 1, n + 1);
        let row = -(y.transpose() * &inner);
        for i in 0..n {
            m[(i + 1, 0)] = y[i];
            m[(0, i + 1)] = row[i];
        }
        m
    };
    let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    let y1y2 = commutator(&embed(&e(0)), &embed(&e(1)));
    let out = commutator(&y1y2, &embed(&e(0)));
    let slot = DVector::from_fn(n, |i, _| out[(i + 1, 0)]);
    assert!((slot - e(1)).norm() < 1e-15);

    let z = DVector::from_vec(vec![0.3, -1.2, 0.7]);
    let y1 = DVector::from_vec(vec![1.0, 0.5, -0.4]);
    let y2 = DVector::from_vec(vec![-0.2, 0.8, 1.1]);
    let out = commutator(&commutator(&embed(&y1), &embed(&y2)), &embed(&z));
    let slot = DVector::from_fn(n, |i, _| out[(i + 1, 0)]);
    let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &inner * b)[(0, 0)];
    let expect = &y2 * ip(&y1, &z) - &y1 * ip(&y2, &z);
    assert!((slot - expect).norm() < 1e-14);
}

#[test]
fn exponential_examples() {
    let tag = AlgebraTag::GeneralLinear(2);
    let z = AlgebraElement::unchecked(DMatrix::zeros(2, 2), tag.clone());
    assert_eq!(exponential(&z, 1e-12).unwrap().matrix, DMatrix::identity(2, 2));
    let pi = std::f64::consts::PI;
    let rot = AlgebraElement::unchecked(DMatrix::from_row_slice(2, 2, &[0.0, -pi, pi, 0.0]), tag);
    let g = exponential(&rot, 1e-12).unwrap();
    assert!((g.matrix + DMatrix::identity(2, 2)).norm() < 1e-14);
}

#[test]
fn exponential_rejects_nonfinite() {
    let m = DMatrix::from_element(2, 2, f64::NAN);
    let a = AlgebraElement::unchecked(m, AlgebraTag::GeneralLinear(2));
    assert!(exponential(&a, 1e-12).is_err());
}

#[test]
fn adjoint_identity_and_singular() {
    let [l1, ..] = so3_generators();
    let id = GroupElement::identity(3, l1.tag.clone());
    assert_eq!(adjoint(&id, &l1).unwrap().matrix, l1.matrix);
    let sing = GroupElement::unchecked(DMatrix::zeros(3, 3), l1.tag.clone());
    assert!(matches!(adjoint(&sing, &l1), Err(Error::NumericalError(_))));
}

#[test]
fn adjoint_series_for_small_x() {
    let x = DMatrix::from_fn(4, 4, |i, k| ((i * 3 + k) % 5) as f64 * 1e-3 - 2e-3);
    let a = DMatrix::from_fn(4, 4, |i, k| ((i + 2 * k) % 7) as f64 - 3.0);
    let tag = AlgebraTag::GeneralLinear(4);
    let g = exponential(&AlgebraElement::unchecked(x.clone(), tag.clone()), 1e-12).unwrap();
    let ad = adjoint(&g, &AlgebraElement::unchecked(a.clone(), tag)).unwrap().matrix;
    let c1 = commutator(&x, &a);
    let c2 = commutator(&x, &c1);
    let c3 = commutator(&x, &c2);
    let series = &a + &c1 + &c2 * 0.5 + &c3 / 6.0;
    assert!((ad - series).norm() < 1e-8);
}

#[test]
fn stabilizer_of_quadratic_form_in_sl() {
    for (p, q) in [(3, 0), (2, 1), (2, 2), (3, 1)] {
        let n1 = p + q;
        let n = n1 - 1;
        let v = crate::linalg::flatten(&crate::linalg::diag_pq(p, q));
        let stab = stabilizer_of(&special_linear(n1), &Representation::SymmetricBilinear, &v);
        assert_eq!(stab.dim(), n * (n + 1) / 2, "sig ({p},{q})");
        assert!(stab.closure_residual() < 1e-8);
    }
}

#[test]
fn stabilizer_of_zero_is_everything() {
    let g = special_linear(3);
    let stab = stabilizer_of(&g, &Representation::Vector, &DVector::zeros(3));
    assert_eq!(stab.dim(), 8);
}

#[test]
fn split_three_form_stabilizer_in_so34() {
    let phi = split_g2_form();
    let so34 = orthogonal(&SymmetricForm::standard(3, 4));
    let stab = stabilizer_of(&so34, &Representation::ThreeForm, &phi.coeffs);
    assert_eq!(stab.dim(), 14);
    assert!(stab.closure_residual() < 1e-8);
    let full = stabilizer_of(&general_linear(7), &Representation::ThreeForm, &phi.coeffs);
    assert_eq!(full.dim(), 14);
    assert!(full.same_span(&stab, 1e-8));
}

#[test]
fn compact_three_form_stabilizer_sits_in_so7() {
    let phi = compact_g2_form();
    let full = stabilizer_of(&general_linear(7), &Representation::ThreeForm, &phi.coeffs);
    assert_eq!(full.dim(), 14);
    let so7 = orthogonal(&SymmetricForm::standard(7, 0));
    assert_eq!(intersect_algebras(&full, &so7).unwrap().dim(), 14);
    // Against the split metric the same form keeps a proper subalgebra only.
    let so34 = orthogonal(&SymmetricForm::standard(3, 4));
    assert!(stabilizer_of(&so34, &Representation::ThreeForm, &phi.coeffs).dim() < 14);
}

/// Ambient metric `diag(1 x (p+1), -1 x (q+1))`.
fn ambient(p: usize, q: usize) -> SymmetricForm {
    SymmetricForm::standard(p + 1, q + 1)
}

#[test]
fn conformal_tractor_stabilizers() {
    for (p, q) in [(2, 1), (1, 1), (3, 0), (2, 2)] {
        let g = orthogonal(&ambient(p, q));
        let n = p + q;
        // positive vector
        let mut v = DVector::zeros(n + 2);
        v[0] = 1.0;
        let stab = stabilizer_of(&g, &Representation::Vector, &v);
        let m = p + q + 1;
        assert_eq!(stab.dim(), m * (m - 1) / 2, "so(p,q+1) for ({p},{q})");
        assert!(stab.closure_residual() < 1e-8);
        // null vector
        let mut v = DVector::zeros(n + 2);
        v[0] = 1.0;
        v[n + 1] = 1.0;
        let stab = stabilizer_of(&g, &Representation::Vector, &v);
        assert_eq!(stab.dim(), n * (n - 1) / 2 + n);
        assert!(stab.closure_residual() < 1e-8);
    }
}

#[test]
fn cr_tractor_stabilizer_is_su_p1_q() {
    for (p, q) in [(1, 1), (2, 1), (1, 2)] {
        let h = HermitianForm::standard(p + 1, q + 1);
        let g = special_unitary(&h);
        let n = p + q + 2;
        let mut v = DVector::zeros(2 * n);
        v[n - 1] = 1.0; // a negative vector
        let stab = stabilizer_of(&g, &Representation::Vector, &v);
        let m = p + 1 + q;
        assert_eq!(stab.dim(), m * m - 1, "su(p+1,q) for ({p},{q})");
        assert!(stab.closure_residual() < 1e-8);
    }
}

#[test]
fn intersection_of_positive_stabilizer_and_parabolic() {
    for (p, q) in [(2, 1), (3, 0), (1, 2)] {
        let n = p + q;
        let g = orthogonal(&ambient(p, q));
        let mut v = DVector::zeros(n + 2);
        v[1] = 1.0;
        let h = stabilizer_of(&g, &Representation::Vector, &v);
        let so_pq = n * (n - 1) / 2;

        // Isotropic ray with <x, v> != 0: the intersection is so(p, q).
        let mut x = DVector::zeros(n + 2);
        x[1] = 1.0;
        x[n + 1] = 1.0;
        let px = stabilizer_of(&g, &Representation::Ray, &x);
        assert_eq!(px.dim(), g.dim() - n);
        let inter = intersect_algebras(&h, &px).unwrap();
        assert_eq!(inter.dim(), so_pq, "({p},{q})");
        assert!(inter.closure_residual() < 1e-8);

        // Isotropic ray orthogonal to v: a parabolic of so(p, q+1) with
        // orbit dimension n - 1.
        let mut x = DVector::zeros(n + 2);
        x[0] = 1.0;
        x[n + 1] = 1.0;
        let px = stabilizer_of(&g, &Representation::Ray, &x);
        let inter = intersect_algebras(&h, &px).unwrap();
        assert_eq!(inter.dim(), h.dim() - (n - 1));
        assert!(inter.closure_residual() < 1e-8);
    }
}

#[test]
fn intersect_trivial_cases() {
    let g = special_linear(3);
    assert!(intersect_algebras(&g, &g).unwrap().same_span(&g, 1e-10));
    let diag = AlgebraBasis::from_spanning(
        &[DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 0.0]))],
        3,
        g.tag.clone(),
    );
    let mut off = DMatrix::zeros(3, 3);
    off[(0, 1)] = 1.0;
    let offb = AlgebraBasis::from_spanning(&[off], 3, g.tag.clone());
    assert_eq!(intersect_algebras(&diag, &offb).unwrap().dim(), 0);
}

fn small_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_identity(a in small_matrix(4), b in small_matrix(4), c in small_matrix(4)) {
        let j = commutator(&a, &commutator(&b, &c))
            + commutator(&b, &commutator(&c, &a))
            + commutator(&c, &commutator(&a, &b));
        prop_assert!(j.norm() < 1e-10);
    }

    #[test]
    fn exp_inverse_and_one_parameter(a in small_matrix(4), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let e = expm(&a);
        let ei = expm(&(-&a));
        prop_assert!((&e * &ei - DMatrix::identity(4, 4)).norm() < 1e-10);
        let lhs = expm(&(&a * (s + t)));
        let rhs = expm(&(&a * s)) * expm(&(&a * t));
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn adjoint_is_automorphism(x in small_matrix(3), a in small_matrix(3), b in small_matrix(3)) {
        let tag = AlgebraTag::GeneralLinear(3);
        let g = GroupElement::unchecked(expm(&x), tag.clone());
        let ad = |m: &DMatrix<f64>| adjoint(&g, &AlgebraElement::unchecked(m.clone(), tag.clone())).unwrap().matrix;
        let lhs = ad(&commutator(&a, &b));
        let rhs = commutator(&ad(&a), &ad(&b));
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn exp_of_so_lands_in_group(c in proptest::collection::vec(-0.5f64..0.5, 10)) {
        let tag = AlgebraTag::Orthogonal(SymmetricForm::standard(3, 2));
        let b = tag.basis();
        let a = AlgebraElement::new(b.combine(&c), tag).unwrap();
        let g = exponential(&a, 1e-12).unwrap();
        prop_assert!(GroupElement::new(g.matrix.clone(), g.tag.clone()).is_ok());
    }
}
