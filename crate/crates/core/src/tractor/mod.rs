//! Chart-level curved geometry: metric ansätze, curvature, tractor
//! connections, parallel transport and holonomy.

mod connection;
mod curvature;
mod holonomy;
mod metric;
mod transport;

#[cfg(test)]
mod tests;

pub use connection::{tractor_derivative, SlotLayout, TractorConnection};
pub use curvature::{bianchi_tolerance, curvature_from_jet, curvature_tensors, CurvatureData};
pub use holonomy::{
    holonomy_algebra, normality_residual, sample_directions, torsion_residual, tractor_curvature, HolonomyResult,
    HolonomySample, LoopFamily,
};
pub use metric::{
    ChartGeometry, DerivativeEngine, MetricJet, MetricSpec, Monomial, ScalarField, StructureKind, MAX_CONDITION,
};
pub use transport::{parallel_transport, transport_matrix, Path, MAX_STEPS, TRANSPORT_TOL};
