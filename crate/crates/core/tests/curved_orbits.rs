//! Curved orbit decompositions on flat and Einstein charts against their
//! homogeneous-model counterparts.

use cartan_orbits_core::bgg::{
    curved_orbit_decompose, find_parallel_sections, Grid, ParallelMetric, ParallelSection, SectionField,
};
use cartan_orbits_core::model::Tolerances;
use cartan_orbits_core::report::StratumGeometry;
use cartan_orbits_core::tractor::{
    holonomy_algebra, ChartGeometry, LoopFamily, MetricSpec, Monomial, ScalarField, StructureKind, TractorConnection,
};
use nalgebra::DMatrix;

fn conn(metric: MetricSpec, kind: StructureKind) -> TractorConnection {
    TractorConnection::new(ChartGeometry::new(metric, kind).unwrap())
}

fn quadratic(n: usize, c0: f64, c2: f64) -> ScalarField {
    let mut terms = vec![Monomial { coeff: c0, powers: vec![0; n] }];
    for i in 0..n {
        let mut powers = vec![0; n];
        powers[i] = 2;
        terms.push(Monomial { coeff: c2, powers });
    }
    ScalarField::Polynomial { terms }
}

#[test]
fn flat_conformal_chart_has_full_parallel_space() {
    let c = conn(MetricSpec::flat(3, 0), StructureKind::Conformal);
    let base = vec![0.0; 3];
    let family = LoopFamily::seeded(&c, &base, 4, 0.5, 1);
    let hol = holonomy_algebra(&c, &base, &family, 8, 1e-6).unwrap();
    assert_eq!(hol.basis.dim(), 0);
    assert!(hol.max_log_norm < 1e-6);
    assert_eq!(find_parallel_sections(&c, &hol.basis, &base).unwrap().len(), 5);
}

#[test]
fn poincare_scale_splits_the_chart_at_the_unit_sphere() {
    let c = conn(MetricSpec::flat(2, 0), StructureKind::Conformal);
    let s = ParallelSection::from_density(c, vec![0.0, 0.0], &quadratic(2, 0.5, -0.5)).unwrap();
    assert!((s.g_type().unwrap() - 1.0).abs() < 1e-10);
    let grid = Grid::cube(2, 1.5, 31);
    let r = curved_orbit_decompose(SectionField::Tractor(&s), &grid, &Tolerances::default()).unwrap();
    for rec in &r.samples {
        let rho2: f64 = rec.coords.iter().map(|x| x * x).sum();
        match rec.label.as_str() {
            "PLUS" => assert!(rho2 < 1.0),
            "MINUS" => assert!(rho2 > 1.0),
            "ZERO" => assert!((rho2 - 1.0).abs() < 1e-8),
            other => panic!("unexpected label {other}"),
        }
    }
    assert!(r.count("PLUS") > 0 && r.count("MINUS") > 0 && r.count("ZERO") > 0);
    assert_eq!(r.summary.geometry["ZERO"], StratumGeometry::Hypersurface);
}

#[test]
fn null_scale_has_one_isolated_zero() {
    let c = conn(MetricSpec::flat(3, 0), StructureKind::Conformal);
    let s = ParallelSection::from_density(c, vec![0.0; 3], &quadratic(3, 0.0, 0.5)).unwrap();
    let r = curved_orbit_decompose(SectionField::Tractor(&s), &Grid::cube(3, 1.0, 5), &Tolerances::default()).unwrap();
    assert_eq!(r.count("ISOLATED_MINUS"), 1);
    assert_eq!(r.count("OPEN_PLUS"), r.samples.len() - 1);
    assert_eq!(r.summary.geometry["ISOLATED_MINUS"], StratumGeometry::Isolated);
}

#[test]
fn flat_projective_metric_matches_the_model_quadric() {
    let c = conn(MetricSpec::flat(3, 0), StructureKind::Projective);
    let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
    let pm = ParallelMetric::new(c, vec![0.0; 3], h).unwrap();
    let r = curved_orbit_decompose(SectionField::Metric(&pm), &Grid::cube(3, 2.0, 9), &Tolerances::default()).unwrap();
    assert_eq!(r.summary.observed_labels, vec!["MINUS", "PLUS", "ZERO"]);
    for rec in r.samples.iter().filter(|s| s.label == "ZERO") {
        let rho2: f64 = rec.coords.iter().map(|x| x * x).sum();
        assert!((rho2 - 1.0).abs() < 1e-8);
    }
}
