//! Fixtures shared by the kernel benchmarks.

use cartan_orbits_core::tractor::{ChartGeometry, MetricSpec, StructureKind, TractorConnection};
use nalgebra::DMatrix;

/// Bump-perturbed flat R^3, the default curved chart of the scenarios.
pub fn bump_chart(kind: StructureKind) -> TractorConnection {
    let metric = MetricSpec::bump(MetricSpec::flat(3, 0), 0.3, vec![0.1, -0.2, 0.15], 0.8, 17);
    TractorConnection::new(ChartGeometry::new(metric, kind).expect("valid bump metric"))
}

/// A fixed, well-conditioned `n x n` matrix with entries in (-1, 1).
pub fn test_matrix(n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| scale * (((7 * i + 3 * j + 1) as f64).sin()))
}
