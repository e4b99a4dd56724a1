use nalgebra::{DMatrix, DVector};

use super::*;
use crate::error::Error;
use crate::lie;

fn conformal(metric: MetricSpec) -> TractorConnection {
    TractorConnection::new(ChartGeometry::new(metric, StructureKind::Conformal).unwrap())
}

fn projective(metric: MetricSpec) -> TractorConnection {
    TractorConnection::new(ChartGeometry::new(metric, StructureKind::Projective).unwrap())
}

fn bump3() -> MetricSpec {
    MetricSpec::bump(MetricSpec::flat(3, 0), 0.3, vec![0.1, -0.2, 0.15], 0.8, 17)
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

#[test]
fn flat_curvature_vanishes() {
    for (p, q) in [(3, 0), (1, 1), (2, 2)] {
        let chart = ChartGeometry::new(MetricSpec::flat(p, q), StructureKind::Conformal).unwrap();
        let c = curvature_tensors(&chart, &vec![0.3; p + q]).unwrap();
        assert!(c.christoffel.iter().all(|m| m.amax() == 0.0));
        assert!(c.riemann.iter().all(|v| *v == 0.0));
        assert_eq!(c.scalar, 0.0);
        assert_eq!(c.schouten.amax(), 0.0);
    }
}

#[test]
fn space_forms_are_einstein() {
    let x2 = [0.4, -1.3];
    let x3 = [0.2, -0.3, 0.1];
    for engine in [DerivativeEngine::Autodiff, DerivativeEngine::CentralDifference { step: 1e-3 }] {
        let tol = bianchi_tolerance(engine);
        let sphere = ChartGeometry::new(MetricSpec::round_sphere(2), StructureKind::Conformal).unwrap().with_engine(engine);
        let c = curvature_tensors(&sphere, &x2).unwrap();
        assert!(c.einstein_residual(1.0) < tol, "{}", c.einstein_residual(1.0));
        assert!((c.scalar - 2.0).abs() < tol);

        let sphere3 = ChartGeometry::new(MetricSpec::round_sphere(3), StructureKind::Projective).unwrap().with_engine(engine);
        let c = curvature_tensors(&sphere3, &x3).unwrap();
        assert!(c.einstein_residual(2.0) < tol);
        // projective Schouten of an Einstein metric Ric = (n-1) g is g
        assert!(rel_err(&c.schouten, &c.g) < tol);

        let ball = ChartGeometry::new(MetricSpec::poincare_ball(3), StructureKind::Conformal).unwrap().with_engine(engine);
        let c = curvature_tensors(&ball, &x3).unwrap();
        assert!(c.einstein_residual(-2.0) < tol, "{}", c.einstein_residual(-2.0));
        // conformal Schouten of a space form of curvature k is (k/2) g
        assert!(rel_err(&c.schouten, &(&c.g * -0.5)) < tol);
        assert!(c.bianchi_residual() < tol);
    }
}

#[test]
fn perturbed_metric_bianchi_and_engine_agreement() {
    let x = [0.2, 0.1, -0.3];
    let ad = ChartGeometry::new(bump3(), StructureKind::Conformal).unwrap();
    let fd = ad.clone().with_engine(DerivativeEngine::CentralDifference { step: 1e-3 });
    let a = curvature_tensors(&ad, &x).unwrap();
    let b = curvature_tensors(&fd, &x).unwrap();
    assert!(a.bianchi_residual() < 1e-6);
    assert!(b.bianchi_residual() < 1e-4);
    assert!(a.ricci_asymmetry() < 1e-6);
    assert!(a.ricci.amax() > 1e-3, "perturbation should curve the chart");
    assert!(rel_err(&a.ricci, &b.ricci) < 1e-4);
}

#[test]
fn degenerate_and_out_of_domain_points() {
    // g = diag(x0^2 + 1e-12, 1) degenerates at the origin
    let x0sq = ScalarField::Polynomial {
        terms: vec![Monomial { coeff: 1.0, powers: vec![2, 0] }, Monomial { coeff: 1e-12, powers: vec![0, 0] }],
    };
    let zero = ScalarField::Constant { value: 0.0 };
    let one = ScalarField::Constant { value: 1.0 };
    let metric = MetricSpec::Polynomial { signature: (2, 0), components: vec![vec![x0sq, zero.clone()], vec![zero, one]] };
    let chart = ChartGeometry::new(metric, StructureKind::Conformal).unwrap();
    assert!(curvature_tensors(&chart, &[0.5, 0.0]).is_ok());
    assert!(matches!(curvature_tensors(&chart, &[0.0, 0.0]), Err(Error::DegenerateMetric { .. })));
    assert!(matches!(curvature_tensors(&chart, &[11.0, 0.0]), Err(Error::DomainError(_))));

    let wrong_sig = ChartGeometry::new(MetricSpec::Polynomial {
        signature: (1, 1),
        components: vec![
            vec![ScalarField::Constant { value: 1.0 }, ScalarField::Constant { value: 0.0 }],
            vec![ScalarField::Constant { value: 0.0 }, ScalarField::Constant { value: 1.0 }],
        ],
    }, StructureKind::Conformal)
    .unwrap();
    assert!(matches!(wrong_sig.metric_at(&[0.0, 0.0]), Err(Error::DegenerateMetric { .. })));
}

#[test]
fn asymmetric_polynomial_metric_is_rejected() {
    let c = |v| ScalarField::Constant { value: v };
    let metric = MetricSpec::Polynomial { signature: (2, 0), components: vec![vec![c(1.0), c(0.1)], vec![c(0.2), c(1.0)]] };
    assert!(ChartGeometry::new(metric, StructureKind::Conformal).is_err());
}

/// `(σ, ∇σ, -Δσ/n)` for `σ = a + b.x + c|x|^2` on flat space.
fn flat_section(a: f64, b: &[f64], c: f64, x: &[f64]) -> DVector<f64> {
    let n = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let mut s = DVector::zeros(n + 2);
    s[0] = a + b.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + c * r2;
    for i in 0..n {
        s[1 + i] = b[i] + 2.0 * c * x[i];
    }
    s[n + 1] = -2.0 * c;
    s
}

#[test]
fn flat_density_sections_are_parallel() {
    let conn = conformal(MetricSpec::flat(3, 0));
    let x = [0.3, -0.7, 0.4];
    for (a, b, c) in [(0.5, [0.0; 3], -0.5), (0.0, [1.0, 0.0, 0.0], 0.0), (0.5, [0.0; 3], 0.5), (0.0, [0.0; 3], 0.5)] {
        let s = flat_section(a, &b, c, &x);
        for xi in [[1.0, 0.0, 0.0], [0.2, -0.5, 0.9]] {
            // ∂_ξ s from the closed form
            let d = (flat_section(a, &b, c, &[x[0] + 1e-6 * xi[0], x[1] + 1e-6 * xi[1], x[2] + 1e-6 * xi[2]])
                - flat_section(a, &b, c, &[x[0] - 1e-6 * xi[0], x[1] - 1e-6 * xi[1], x[2] - 1e-6 * xi[2]]))
                / 2e-6;
            let nabla = tractor_derivative(&conn, &x, &xi, &s, &d).unwrap();
            assert!(nabla.amax() < 1e-8, "{nabla}");
        }
        let hess = DMatrix::identity(3, 3) * (2.0 * c);
        let grad: Vec<f64> = (0..3).map(|i| s[1 + i]).collect();
        let built = conn.density_tractor(&x, s[0], &grad, &hess).unwrap();
        assert!((built - &s).amax() < 1e-14);
    }
}

#[test]
fn flat_tractor_norms() {
    let conn = conformal(MetricSpec::flat(3, 0));
    let x = [0.3, -0.7, 0.4];
    let h = conn.tractor_metric(&x).unwrap().unwrap();
    let expect = [((0.5, -0.5), 1.0), ((0.5, 0.5), -1.0), ((0.0, 0.0), 1.0), ((0.0, 0.5), 0.0)];
    for ((a, c), norm) in expect {
        let b = if a == 0.0 && c == 0.0 { [1.0, 0.0, 0.0] } else { [0.0; 3] };
        let s = flat_section(a, &b, c, &x);
        assert!(((s.transpose() * &h * &s)[(0, 0)] - norm).abs() < 1e-14);
    }
}

#[test]
fn constant_section_is_not_parallel_on_curved_chart() {
    let conn = conformal(MetricSpec::round_sphere(3));
    let s = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    let d = DVector::zeros(5);
    let nabla = tractor_derivative(&conn, &[0.3, 0.1, -0.2], &[1.0, 0.0, 0.0], &s, &d).unwrap();
    assert!(nabla.amax() > 0.1);
}

#[test]
fn transport_basics() {
    let conn = conformal(MetricSpec::flat(3, 0));
    let x0 = [0.1, 0.2, -0.3];
    let v0 = DVector::from_vec(vec![1.0, -2.0, 0.5, 0.3, 0.7]);
    let stay = parallel_transport(&conn, &Path::line(&x0, &x0), &v0, TRANSPORT_TOL).unwrap();
    assert_eq!(stay, v0);

    // flat chart: transport reproduces the closed-form parallel section
    let b = [0.3, -1.0, 0.25];
    let x1 = [1.5, -0.4, 0.9];
    let path = Path::Bezier { control: vec![x0.to_vec(), vec![2.0, 1.0, 0.0], vec![-1.0, 0.5, 2.0], x1.to_vec()] };
    let moved = parallel_transport(&conn, &path, &flat_section(0.7, &b, -0.4, &x0), TRANSPORT_TOL).unwrap();
    assert!((moved - flat_section(0.7, &b, -0.4, &x1)).amax() < 1e-9);

    let proj = projective(MetricSpec::flat(3, 0));
    let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 0.5]);
    let moved = parallel_transport(&proj, &Path::line(&x0, &x1), &v, TRANSPORT_TOL).unwrap();
    let expect = DVector::from_fn(4, |i, _| if i < 3 { v[i] - v[3] * (x1[i] - x0[i]) } else { v[3] });
    assert!((moved - expect).amax() < 1e-12);
}

#[test]
fn transport_round_trip_and_metric() {
    let conn = conformal(bump3());
    let x0 = [0.0, 0.0, 0.0];
    let path = Path::Polyline { points: vec![x0.to_vec(), vec![0.6, 0.1, -0.2], vec![0.3, -0.5, 0.4]] };
    let t = transport_matrix(&conn, &path, TRANSPORT_TOL, MAX_STEPS).unwrap();
    let back = transport_matrix(&conn, &path.reversed(), TRANSPORT_TOL, MAX_STEPS).unwrap();
    assert!((&back * &t - DMatrix::identity(5, 5)).amax() < 1e-8);
    let h0 = conn.tractor_metric(&x0).unwrap().unwrap();
    let h1 = conn.tractor_metric(&path.end()).unwrap().unwrap();
    assert!((t.transpose() * h1 * &t - h0).amax() < 1e-7);
}

#[test]
fn transport_step_cap() {
    let conn = conformal(bump3());
    let path = Path::line(&[0.0, 0.0, 0.0], &[0.5, 0.5, 0.5]);
    assert!(matches!(transport_matrix(&conn, &path, 1e-30, 64), Err(Error::NoConvergence(_))));
}

#[test]
fn path_leaving_domain_fails() {
    let conn = conformal(MetricSpec::poincare_ball(2));
    let path = Path::line(&[0.0, 0.0], &[0.9, 0.0]);
    assert!(matches!(transport_matrix(&conn, &path, TRANSPORT_TOL, MAX_STEPS), Err(Error::DomainError(_))));
}

#[test]
fn curvature_of_flat_and_conformally_flat_charts() {
    let e = |i: usize| {
        let mut v = vec![0.0; 3];
        v[i] = 1.0;
        v
    };
    let x = [0.2, -0.4, 0.3];
    let flat = conformal(MetricSpec::flat(3, 0));
    assert_eq!(tractor_curvature(&flat, &x, &e(0), &e(1)).unwrap().amax(), 0.0);
    for conn in [conformal(MetricSpec::round_sphere(3)), conformal(MetricSpec::poincare_ball(3)), projective(MetricSpec::round_sphere(3))] {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let k = tractor_curvature(&conn, &x, &e(a), &e(b)).unwrap();
            assert!(k.amax() < 1e-5, "{}", k.amax());
        }
    }
}

#[test]
fn perturbed_curvature_is_antisymmetric_and_torsion_free() {
    let x = [0.2, -0.1, 0.3];
    let xi = [0.3, 0.9, -0.2];
    let eta = [-0.5, 0.1, 0.7];
    for conn in [conformal(bump3()), projective(bump3())] {
        let k1 = tractor_curvature(&conn, &x, &xi, &eta).unwrap();
        let k2 = tractor_curvature(&conn, &x, &eta, &xi).unwrap();
        assert!(k1.amax() > 1e-3);
        assert!((&k1 + &k2).amax() < 1e-7);
        assert!(torsion_residual(&conn, &x).unwrap() < 1e-6);
    }
}

#[test]
fn conformal_curvature_matches_cotton_block() {
    // the T^1-row of κ is minus the Cotton tensor C_b(ξ, η) = (∇_ξ P)(η, b) - (∇_η P)(ξ, b), index raised
    let conn = conformal(bump3());
    let x = [0.1, 0.2, -0.1];
    let n = 3;
    let h = 1e-4;
    let at = |y: &[f64]| curvature_tensors(&conn.chart, y).unwrap();
    let c0 = at(&x);
    let dp: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += h;
            m[k] -= h;
            (at(&p).schouten - at(&m).schouten) / (2.0 * h)
        })
        .collect();
    // (∇_k P)_{ab} = ∂_k P_ab - Γ^c_{ka} P_cb - Γ^c_{kb} P_ac
    let nabla_p = |k: usize, a: usize, b: usize| {
        let mut v = dp[k][(a, b)];
        for c in 0..n {
            v -= c0.christoffel[c][(k, a)] * c0.schouten[(c, b)] + c0.christoffel[c][(k, b)] * c0.schouten[(a, c)];
        }
        v
    };
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let mut ei = vec![0.0; n];
        ei[i] = 1.0;
        let mut ej = vec![0.0; n];
        ej[j] = 1.0;
        let k = tractor_curvature(&conn, &x, &ei, &ej).unwrap();
        let cotton = DVector::from_fn(n, |b, _| nabla_p(i, j, b) - nabla_p(j, i, b));
        let raised = &c0.g_inv * cotton;
        for b in 0..n {
            assert!((k[(n + 1, 1 + b)] + raised[b]).abs() < 1e-6, "{} vs {}", k[(n + 1, 1 + b)], -raised[b]);
        }
        // Weyl vanishes in dimension 3
        assert!(k.view((1, 1), (n, n)).amax() < 1e-7);
    }
}

#[test]
fn small_loop_holonomy_matches_curvature() {
    let conn = conformal(bump3());
    let x = [0.1, 0.2, -0.1];
    let k = tractor_curvature(&conn, &x, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|eps| {
            let t = transport_matrix(&conn, &Path::square_loop(&x, 0, 1, *eps), 1e-15, MAX_STEPS).unwrap();
            (lie::logm(&t).unwrap() + &k * (eps * eps)).norm()
        })
        .collect();
    let slope1 = (errs[0] / errs[1]).log2();
    let slope2 = (errs[1] / errs[2]).log2();
    assert!(slope1 >= 2.9 && slope2 >= 2.9, "{errs:?}");
}

#[test]
fn normality_probe() {
    let dirs = sample_directions(3, 8, 5);
    let x = [0.1, -0.2, 0.05];
    assert_eq!(normality_residual(&conformal(MetricSpec::flat(3, 0)), &x, &dirs).unwrap(), 0.0);
    assert!(normality_residual(&conformal(MetricSpec::round_sphere(3)), &x, &dirs).unwrap() < 1e-6);
    assert!(normality_residual(&conformal(bump3()), &x, &dirs).unwrap() < 1e-4);
    assert!(normality_residual(&projective(bump3()), &x, &dirs).unwrap() < 1e-4);
}

#[test]
fn holonomy_of_flat_and_conformally_flat_charts() {
    let x0 = [0.0, 0.0, 0.0];
    for conn in [
        conformal(MetricSpec::flat(3, 0)),
        conformal(MetricSpec::round_sphere(3)),
        projective(MetricSpec::round_sphere(3)),
        conformal(MetricSpec::rescaled(
            MetricSpec::flat(2, 1),
            ScalarField::Gaussian { amplitude: 0.3, center: vec![0.0; 3], width: 1.0 },
        )),
    ] {
        let fam = LoopFamily::seeded(&conn, &x0, 6, 0.8, 1);
        let hol = holonomy_algebra(&conn, &x0, &fam, 12, 1e-6).unwrap();
        assert_eq!(hol.basis.dim(), 0);
        assert!(hol.max_log_norm < 1e-6);
    }
}

#[test]
fn perturbed_conformal_holonomy_saturates() {
    let x0 = [0.0, 0.0, 0.0];
    let conn = conformal(bump3());
    let fam = LoopFamily::seeded(&conn, &x0, 12, 0.8, 3);
    let hol = holonomy_algebra(&conn, &x0, &fam, 20, 1e-6).unwrap();
    assert_eq!(hol.basis.dim(), 10);
    assert!(hol.closure_residual < 1e-8);
    for s in &hol.samples {
        assert!(s.metric_residual.unwrap() < 1e-7);
    }
    // a conformal rescaling of the same metric has the same holonomy dimension
    let rescaled = conformal(MetricSpec::rescaled(
        bump3(),
        ScalarField::Polynomial { terms: vec![Monomial { coeff: 0.2, powers: vec![1, 0, 1] }] },
    ));
    let fam = LoopFamily::seeded(&rescaled, &x0, 12, 0.8, 3);
    assert_eq!(holonomy_algebra(&rescaled, &x0, &fam, 20, 1e-6).unwrap().basis.dim(), 10);
}
