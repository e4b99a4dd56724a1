use cartan_orbits_core::forms::{HermitianForm, SymmetricForm};
use cartan_orbits_core::lie::three_form::split_g2_form;
use cartan_orbits_core::model::{
    expected_labels, h_orbit_invariance_check, orbit_decompose_grid, p_type, sample_uniform, Sampler, Tolerances,
};
use cartan_orbits_core::{HomogeneousModel, Label, ModelKind, ReductionDatum};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(m: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(m);
    v[i] = 1.0;
    v
}

fn cases() -> Vec<(HomogeneousModel, ReductionDatum, Vec<&'static str>)> {
    let conf = HomogeneousModel::conformal(2, 1).unwrap();
    let null = unit(5, 0) + unit(5, 4);
    vec![
        (
            HomogeneousModel::projective(3).unwrap(),
            ReductionDatum::SymmetricForm(SymmetricForm::standard(3, 1)),
            vec!["MINUS", "PLUS", "ZERO"],
        ),
        (
            HomogeneousModel::projective(3).unwrap(),
            ReductionDatum::SymmetricForm(SymmetricForm::standard(4, 0)),
            vec!["PLUS"],
        ),
        (
            HomogeneousModel::complex_projective(2).unwrap(),
            ReductionDatum::HermitianForm(HermitianForm::standard(2, 1)),
            vec!["MINUS", "PLUS", "ZERO"],
        ),
        (conf.clone(), ReductionDatum::Vector(unit(5, 0)), vec!["MINUS", "PLUS", "ZERO"]),
        (
            conf,
            ReductionDatum::Vector(null),
            vec!["HYPERSURFACE", "ISOLATED_MINUS", "ISOLATED_PLUS", "OPEN_MINUS", "OPEN_PLUS"],
        ),
        (HomogeneousModel::conformal(3, 0).unwrap(), ReductionDatum::Vector(unit(5, 4)), vec!["MINUS", "PLUS"]),
        (HomogeneousModel::cr(0, 1).unwrap(), ReductionDatum::Vector(unit(6, 1)), vec!["OPEN", "ZERO"]),
        (HomogeneousModel::conformal(2, 3).unwrap(), ReductionDatum::ThreeForm(split_g2_form()), vec!["SINGLE"]),
    ]
}

#[test]
fn sampled_inventories_equal_expected_orbits() {
    let tol = Tolerances::default();
    for (m, d, labels) in cases() {
        let expected: Vec<_> = expected_labels(&m, &d).unwrap().iter().map(|l| l.as_str()).collect();
        let mut sorted = expected.clone();
        sorted.sort();
        assert_eq!(sorted, labels, "{:?}", m.kind);
        let r = orbit_decompose_grid(&m, &d, &Sampler::Stratified { per_label: 10 }, 200, 5, &tol).unwrap();
        assert!(r.labels_match(), "{:?}: {:?}", m.kind, r.summary.observed_labels);
        assert_eq!(r.summary.ambiguous, 0, "{:?}", m.kind);
    }
}

#[test]
fn labels_are_constant_along_stabilizer_orbits() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (m, d, _) in cases() {
        if matches!(m.kind, ModelKind::Conformal { p: 2, q: 3 }) {
            continue;
        }
        for seed in 0..5 {
            let x = sample_uniform(&m, &mut rng);
            assert_eq!(h_orbit_invariance_check(&m, &d, &x, 20, seed, &tol).unwrap(), 0, "{:?}", m.kind);
        }
    }
}

#[test]
fn decomposition_is_deterministic() {
    let (m, d, _) = cases().swap_remove(4);
    let tol = Tolerances::default();
    let run = || {
        let r = orbit_decompose_grid(&m, &d, &Sampler::Uniform, 100, 42, &tol).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        out
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projective_label_is_sign_of_form(x in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let v = DVector::from_vec(x);
        prop_assume!(v.norm() > 1e-3);
        let m = HomogeneousModel::projective(3).unwrap();
        let form = SymmetricForm::standard(3, 1);
        let d = ReductionDatum::SymmetricForm(form.clone());
        let value = (form.matrix() * &v).dot(&v) / v.norm_squared();
        prop_assume!(value.abs() > 1e-6);
        let l = p_type(&m, &d, &m.point(v).unwrap(), &Tolerances::default()).unwrap().label;
        prop_assert_eq!(l, if value > 0.0 { Label::Plus } else { Label::Minus });
    }
}
