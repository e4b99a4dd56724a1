use super::*;
use crate::lie::intersect_algebras;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn sym(entries: &[f64]) -> ReductionDatum {
    ReductionDatum::SymmetricForm(SymmetricForm::diagonal(entries))
}

fn so_dim(m: usize) -> usize {
    m * (m.saturating_sub(1)) / 2
}

/// `e_i` in the model's ambient space.
fn basis_vector(model: &HomogeneousModel, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(model.ambient_dim());
    v[i] = 1.0;
    v
}

/// A null vector `(s_0 + s_last)` in standard coordinates.
fn null_vector(model: &HomogeneousModel) -> DVector<f64> {
    let mut v = basis_vector(model, 0);
    v[model.ambient_dim() - 1] = 1.0;
    v
}

#[test]
fn complement_is_transverse_to_parabolic() {
    let models = [
        HomogeneousModel::projective(3).unwrap(),
        HomogeneousModel::conformal(2, 1).unwrap(),
        HomogeneousModel::conformal(1, 1).unwrap(),
        HomogeneousModel::complex_projective(2).unwrap(),
        HomogeneousModel::cr(0, 1).unwrap(),
        HomogeneousModel::cr(1, 1).unwrap(),
    ];
    for m in models {
        assert_eq!(m.g_minus.dim(), m.dim(), "{:?}", m.kind);
        assert_eq!(m.parabolic.dim() + m.dim(), m.algebra.dim(), "{:?}", m.kind);
        for e in &m.g_minus.elements {
            assert!(m.tag().algebra_residual(e).unwrap() < 1e-12, "{:?}", m.kind);
        }
        assert_eq!(intersect_algebras(&m.g_minus, &m.parabolic).unwrap().dim(), 0);
        // the block-lower part is abelian
        assert!(m.g_minus.closure_residual() < 1e-12 || matches!(m.kind, ModelKind::Cr { .. }));
    }
}

#[test]
fn conformal_chart_embedding_is_the_null_quadric() {
    let m = HomogeneousModel::conformal(2, 1).unwrap();
    let x = [0.3, -0.5, 0.8];
    let adapted = m.to_adapted(&m.chart_point(&x));
    let q = x[0] * x[0] + x[1] * x[1] - x[2] * x[2];
    let expect = DVector::from_vec(vec![1.0, x[0], x[1], x[2], -q / 2.0]);
    assert!((adapted - expect).norm() < 1e-14);
}

#[test]
fn projective_minus_example() {
    let m = HomogeneousModel::projective(2).unwrap();
    let x = m.point(DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
    let l = p_type(&m, &sym(&[1.0, 1.0, -1.0]), &x, &tol()).unwrap();
    assert_eq!(l.label, Label::Minus);
    assert_eq!(l.scenario, ScenarioKind::ProjectiveMetric);
}

#[test]
fn null_datum_at_its_own_ray_is_isolated_plus() {
    let m = HomogeneousModel::conformal(1, 1).unwrap();
    let v = null_vector(&m);
    let d = ReductionDatum::Vector(v.clone());
    let x = m.point(v.clone()).unwrap();
    assert_eq!(p_type(&m, &d, &x, &tol()).unwrap().label, Label::IsolatedPlus);
    let x = m.point(-v).unwrap();
    assert_eq!(p_type(&m, &d, &x, &tol()).unwrap().label, Label::IsolatedMinus);
}

#[test]
fn p_type_rejects_bad_points_and_mismatches() {
    let m = HomogeneousModel::conformal(2, 1).unwrap();
    let d = ReductionDatum::Vector(basis_vector(&m, 0));
    let bad = ModelPoint::new(basis_vector(&m, 0), QuotientMode::Ray).unwrap();
    assert!(matches!(p_type(&m, &d, &bad, &tol()), Err(Error::InvalidPoint(_))));
    let x = m.point(null_vector(&m)).unwrap();
    let wrong = sym(&[1.0, 1.0, 1.0, -1.0, -1.0]);
    assert!(matches!(p_type(&m, &wrong, &x, &tol()), Err(Error::ScenarioMismatch(_))));
}

fn standard_j() -> DMatrix<f64> {
    let mut j = DMatrix::zeros(4, 4);
    j[(1, 0)] = 1.0;
    j[(0, 1)] = -1.0;
    j[(3, 2)] = 1.0;
    j[(2, 3)] = -1.0;
    j
}

#[test]
fn complex_structure_has_a_single_p_type() {
    let m = HomogeneousModel::conformal(1, 1).unwrap();
    let d = ReductionDatum::ComplexStructure(standard_j());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let x = sample_uniform(&m, &mut rng);
        assert_eq!(p_type(&m, &d, &x, &tol()).unwrap().label, Label::Single);
    }
    let x = sample_uniform(&m, &mut rng);
    assert_eq!(orbit_dimension(&m, &d, &x).unwrap(), m.dim());
}

#[test]
fn complex_structure_must_be_orthogonal() {
    let m = HomogeneousModel::conformal(1, 1).unwrap();
    let mut j = standard_j();
    j[(1, 0)] = 2.0;
    j[(0, 1)] = -0.5;
    assert!(matches!(ReductionDatum::ComplexStructure(j).validate(&m), Err(Error::InvalidDatum(_))));
}

#[test]
fn model_solution_value_laws() {
    let d = sym(&[1.0, 1.0, -1.0]);
    let id = GroupElement::identity(3, AlgebraTag::SpecialLinear(3));
    assert_eq!(model_solution_value(&d, &id).unwrap(), d);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = crate::lie::special_linear(3);
    let g1 = GroupElement::unchecked(random_group_element(&g, 0.7, &mut rng), AlgebraTag::SpecialLinear(3));
    let g2 = GroupElement::unchecked(random_group_element(&g, 0.7, &mut rng), AlgebraTag::SpecialLinear(3));
    let direct = model_solution_value(&d, &g1.compose(&g2)).unwrap();
    let stepwise = model_solution_value(&model_solution_value(&d, &g1).unwrap(), &g2).unwrap();
    assert!((direct.flat() - stepwise.flat()).norm() < 1e-12);

    // boost in the (1,3)-plane
    let (c, s) = (0.8f64.cosh(), 0.8f64.sinh());
    let boost = DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c]);
    let moved = model_solution_value(&d, &GroupElement::unchecked(boost.clone(), AlgebraTag::SpecialLinear(3))).unwrap();
    let ReductionDatum::SymmetricForm(f) = &moved else { panic!() };
    let expect = boost.transpose() * DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0])) * &boost;
    assert!((f.matrix() - expect).norm() < 1e-12);
    assert_eq!(f.signature(), crate::forms::Signature::new(2, 1, 0));
}

fn random_gminus(m: &HomogeneousModel, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let mut x = random_algebra_element(&m.g_minus, 1.0, rng);
    let norm = x.norm();
    if norm > 1.0 {
        x /= norm;
    }
    AlgebraElement::unchecked(x, m.tag().clone())
}

#[test]
fn flow_identity_on_models() {
    let cases: Vec<(HomogeneousModel, ReductionDatum)> = vec![
        (HomogeneousModel::projective(3).unwrap(), sym(&[1.0, 1.0, 1.0, -1.0])),
        (HomogeneousModel::conformal(2, 1).unwrap(), ReductionDatum::Vector(DVector::from_vec(vec![1.0, 0.2, 0.0, 0.3, 0.1]))),
    ];
    for (m, d) in cases {
        let h = d.stabilizer(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zero = AlgebraElement::unchecked(DMatrix::zeros(m.ambient_dim(), m.ambient_dim()), m.tag().clone());
        let u = GroupElement::unchecked(random_group_element(&h, 1.0, &mut rng), m.tag().clone());
        assert!(flow_identity_check(&m, &d, &u, &zero).unwrap() < 1e-13);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let u = GroupElement::unchecked(random_group_element(&h, 1.0, &mut rng), m.tag().clone());
            let x = random_gminus(&m, &mut rng);
            worst = worst.max(flow_identity_check(&m, &d, &u, &x).unwrap());
        }
        assert!(worst < 1e-10, "{:?}: {worst}", m.kind);
    }
}

#[test]
fn flow_identity_rejects_directions_outside_complement() {
    let m = HomogeneousModel::projective(2).unwrap();
    let d = sym(&[1.0, 1.0, -1.0]);
    let u = GroupElement::identity(3, m.tag().clone());
    let x = AlgebraElement::unchecked(m.parabolic.elements[0].clone(), m.tag().clone());
    assert!(matches!(flow_identity_check(&m, &d, &u, &x), Err(Error::InvalidDirection(_))));
}

#[test]
fn projective_zero_stratum_is_a_hypersurface() {
    let m = HomogeneousModel::projective(2).unwrap();
    let d = sym(&[1.0, 1.0, -1.0]);
    let r = orbit_decompose_grid(&m, &d, &Sampler::Stratified { per_label: 50 }, 400, 1, &tol()).unwrap();
    assert!(r.labels_match());
    for s in r.samples.iter().filter(|s| s.label == "ZERO") {
        assert!(s.diagnostics.grad_norm.unwrap() > 1e-3);
    }
    assert_eq!(r.summary.geometry["ZERO"], crate::report::StratumGeometry::Hypersurface);
}

#[test]
fn riemannian_conformal_negative_datum_has_no_zero_orbit() {
    let m = HomogeneousModel::conformal(3, 0).unwrap();
    let d = ReductionDatum::Vector(basis_vector(&m, 4));
    assert_eq!(expected_labels(&m, &d).unwrap(), vec![Label::Plus, Label::Minus]);
    let r = orbit_decompose_grid(&m, &d, &Sampler::Uniform, 2000, 9, &tol()).unwrap();
    assert_eq!(r.count("ZERO"), 0);
    assert!(r.labels_match());
    // a positive datum in the same signature does have a zero orbit
    let d = ReductionDatum::Vector(basis_vector(&m, 0));
    assert!(expected_labels(&m, &d).unwrap().contains(&Label::Zero));
}

#[test]
fn cr_zero_stratum_has_codimension_two() {
    let m = HomogeneousModel::cr(0, 1).unwrap();
    let d = ReductionDatum::Vector(basis_vector(&m, 2));
    let r = orbit_decompose_grid(&m, &d, &Sampler::Stratified { per_label: 40 }, 400, 2, &tol()).unwrap();
    assert!(r.labels_match(), "{:?}", r.summary);
    for s in r.samples.iter().filter(|s| s.label == "ZERO") {
        assert_eq!(s.diagnostics.jacobian_rank, Some(2));
    }
    assert_eq!(r.summary.geometry["ZERO"], crate::report::StratumGeometry::Codimension2);
}

#[test]
fn null_datum_inventory_and_geometry() {
    let m = HomogeneousModel::conformal(1, 1).unwrap();
    let d = ReductionDatum::Vector(null_vector(&m));
    let r = orbit_decompose_grid(&m, &d, &Sampler::Stratified { per_label: 20 }, 500, 4, &tol()).unwrap();
    assert_eq!(r.summary.observed_labels.len(), 5);
    assert!(r.labels_match());
    use crate::report::StratumGeometry as G;
    assert_eq!(r.summary.geometry["ISOLATED_PLUS"], G::Isolated);
    assert_eq!(r.summary.geometry["ISOLATED_MINUS"], G::Isolated);
    assert_eq!(r.summary.geometry["HYPERSURFACE"], G::Hypersurface);
}

#[test]
fn h_orbit_invariance() {
    let m = HomogeneousModel::projective(3).unwrap();
    let d = sym(&[1.0, 1.0, 1.0, -1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for label in [Label::Plus, Label::Zero, Label::Minus] {
        let x = sample_label_targets(&m, &d, label, &tol(), &mut rng).unwrap();
        assert_eq!(h_orbit_invariance_check(&m, &d, &x, 0, 1, &tol()).unwrap(), 0);
        assert_eq!(h_orbit_invariance_check(&m, &d, &x, 500, 1, &tol()).unwrap(), 0);
    }
    let m = HomogeneousModel::conformal(2, 1).unwrap();
    let d = ReductionDatum::Vector(null_vector(&m));
    for label in expected_labels(&m, &d).unwrap() {
        let x = sample_label_targets(&m, &d, label, &tol(), &mut rng).unwrap();
        assert_eq!(h_orbit_invariance_check(&m, &d, &x, 100, 2, &tol()).unwrap(), 0, "{label}");
    }
}

#[test]
fn stabilizer_pairs() {
    // projective, signature (p, q) with p + q = n + 1
    for (p, q) in [(3, 1), (2, 2), (4, 0)] {
        let n = p + q - 1;
        let m = HomogeneousModel::projective(n).unwrap();
        let mut entries = vec![1.0; p];
        entries.extend(vec![-1.0; q]);
        let d = sym(&entries);
        let x = m.point(basis_vector(&m, 0)).unwrap();
        let (h, hp) = stabilizer_pair(&m, &d, &x).unwrap();
        assert_eq!((h.dim(), hp.dim()), (so_dim(n + 1), so_dim(n)));
    }
    // conformal positive vector, zero orbit
    for (p, q) in [(2, 1), (1, 1), (2, 2)] {
        let n = p + q;
        let m = HomogeneousModel::conformal(p, q).unwrap();
        let d = ReductionDatum::Vector(basis_vector(&m, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = sample_label_targets(&m, &d, Label::Zero, &tol(), &mut rng).unwrap();
        let (h, hp) = stabilizer_pair(&m, &d, &x).unwrap();
        assert_eq!(h.dim(), so_dim(n + 1));
        assert_eq!(hp.dim(), so_dim(n + 1) - (n - 1));
    }
    // CR negative vector, open orbit
    for (p, q) in [(0, 1), (1, 1), (1, 2)] {
        let m = HomogeneousModel::cr(p, q).unwrap();
        let d = ReductionDatum::Vector(basis_vector(&m, p + q + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = sample_label_targets(&m, &d, Label::Open, &tol(), &mut rng).unwrap();
        let (h, hp) = stabilizer_pair(&m, &d, &x).unwrap();
        let k = p + q + 1;
        assert_eq!(h.dim(), k * k - 1);
        let su_pq = ((p + q) * (p + q)).saturating_sub(1);
        assert_eq!(hp.dim(), su_pq, "({p},{q})");
    }
}

#[test]
fn hermitian_inventory() {
    let m = HomogeneousModel::complex_projective(2).unwrap();
    let h = HermitianForm::standard(2, 1);
    let d = ReductionDatum::HermitianForm(h);
    let r = orbit_decompose_grid(&m, &d, &Sampler::Stratified { per_label: 30 }, 1000, 5, &tol()).unwrap();
    assert!(r.labels_match());
    assert_eq!(r.summary.observed_labels.len(), 3);
    assert_eq!(r.summary.geometry["ZERO"], crate::report::StratumGeometry::Hypersurface);
}

#[test]
fn three_form_has_a_single_p_type() {
    let m = HomogeneousModel::conformal(2, 3).unwrap();
    let phi = crate::lie::three_form::split_g2_form();
    let d = ReductionDatum::ThreeForm(phi);
    let h = d.stabilizer(&m);
    assert_eq!(h.dim(), 14);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let x = sample_uniform(&m, &mut rng);
        assert_eq!(p_type(&m, &d, &x, &tol()).unwrap().label, Label::Single);
        assert_eq!(ptype::orbit_dimension_with(&m, &h, &x).unwrap(), 5);
    }
}

fn model_and_datum(which: usize) -> (HomogeneousModel, ReductionDatum) {
    match which {
        0 => (HomogeneousModel::projective(3).unwrap(), sym(&[1.0, 1.0, -1.0, -1.0])),
        1 => {
            let m = HomogeneousModel::conformal(2, 1).unwrap();
            let v = null_vector(&m);
            (m, ReductionDatum::Vector(v))
        }
        2 => (
            HomogeneousModel::complex_projective(2).unwrap(),
            ReductionDatum::HermitianForm(HermitianForm::standard(1, 2)),
        ),
        _ => {
            let m = HomogeneousModel::cr(0, 1).unwrap();
            let v = basis_vector(&m, 2);
            (m, ReductionDatum::Vector(v))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn labels_invariant_under_representative_rescaling(
        which in 0usize..4,
        seed in any::<u64>(),
        target in 0usize..6,
        lam in 0.05f64..20.0,
        arg in 0.0f64..std::f64::consts::TAU,
    ) {
        let (m, d) = model_and_datum(which);
        let labels = expected_labels(&m, &d).unwrap();
        let label = labels[target % labels.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sample_label_targets(&m, &d, label, &tol(), &mut rng).unwrap();
        let base = p_type(&m, &d, &x, &tol()).unwrap().label;
        prop_assert_eq!(base, label);
        let scaled = match m.quotient_mode() {
            QuotientMode::Ray => &x.representative * lam,
            QuotientMode::ComplexLine => m.complex_scale(&x.representative, lam * arg.cos(), lam * arg.sin()),
        };
        let y = ModelPoint::new(scaled, x.mode).unwrap();
        prop_assert_eq!(p_type(&m, &d, &y, &tol()).unwrap().label, base);
    }
}
