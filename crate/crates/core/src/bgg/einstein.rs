use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::strata::{metric_signature, zero_strata, Grid, SectionField};
use super::{find_parallel_metrics, ParallelMetric, ParallelSection};
use crate::error::{Error, Result};
use crate::forms::Signature;
use crate::jet::{Jet, Scalar};
use crate::model::Tolerances;
use crate::report::StrataReport;
use crate::tractor::{
    curvature_from_jet, curvature_tensors, holonomy_algebra, ChartGeometry, LoopFamily, MetricJet, ScalarField,
    StructureKind, TractorConnection,
};

/// Default distance of Einstein sample points from `Z(σ)`, in units of `σ`.
pub const EINSTEIN_MARGIN: f64 = 0.05;

/// Scalar densities with a value, gradient and Hessian at each chart point.
pub trait DensityJet: Sync {
    fn density_jet(&self, x: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)>;
}

impl DensityJet for ParallelSection {
    fn density_jet(&self, x: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
        ParallelSection::density_jet(self, x)
    }
}

impl DensityJet for ScalarField {
    fn density_jet(&self, x: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
        Ok(self.jet(x))
    }
}

/// `max_x |Ric(ĝ) - λ ĝ|_F` for `ĝ = σ^{-2} g` over the sample points.
pub fn einstein_verify(chart: &ChartGeometry, sigma: &dyn DensityJet, lambda: f64, points: &[Vec<f64>], margin: f64) -> Result<f64> {
    let n = chart.dim();
    let residuals: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let (s, grad, hess) = sigma.density_jet(x)?;
            if s.abs() < margin {
                return Err(Error::MarginViolation { at: x.clone(), sigma: s });
            }
            let hess_rows: Vec<Vec<f64>> = hess.row_iter().map(|r| r.iter().copied().collect()).collect();
            let w = Jet::from_parts(s, &grad, &hess_rows).powi(-2);
            let mj = chart.metric_jet(x)?;
            let comps: Vec<Jet> = (0..n * n)
                .map(|k| {
                    let (a, b) = (k / n, k % n);
                    let d: Vec<f64> = (0..n).map(|i| mj.dg[i][(a, b)]).collect();
                    let h: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| mj.ddg[i][j][(a, b)]).collect()).collect();
                    Jet::from_parts(mj.g[(a, b)], &d, &h) * w
                })
                .collect();
            let rescaled = MetricJet::from_jets(n, &comps)?;
            let c = curvature_from_jet(&rescaled, StructureKind::Conformal);
            Ok((&c.ricci - &c.g * lambda).norm())
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Result of the projective-metric scenario on an Einstein chart.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectiveMetricReport {
    /// Einstein constant read at the basepoint, `Ric = λ g`.
    pub einstein_constant: f64,
    pub einstein_residual: f64,
    pub holonomy_dim: usize,
    /// Dimension of the space of parallel tractor metrics.
    pub parallel_metric_dim: usize,
    /// Parallel tractor metric determined by the chart metric, `g ⊕ (n-1)/λ`.
    pub metric: Option<Vec<Vec<f64>>>,
    pub signature: Option<Signature>,
    /// Distance of that metric from the parallel family at the basepoint.
    pub kernel_residual: Option<f64>,
    /// Largest deviation of the transported metric from `g(x) ⊕ (n-1)/λ` on the grid.
    pub transport_residual: Option<f64>,
    pub strata: Option<StrataReport>,
}

/// Projective tractor connection of the chart's Levi-Civita connection,
/// its holonomy, the parallel tractor metrics, and the curved orbit
/// decomposition by the sign of `σ = H(X, X)`.
///
/// On an Einstein chart with `λ ≠ 0` the metric `g ⊕ (n-1)/λ` in the slot
/// frame is parallel; it is checked against the holonomy kernel and against
/// radial transport over the grid.
pub fn projective_metric_scenario(
    chart: &ChartGeometry,
    grid: &Grid,
    family_size: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ProjectiveMetricReport> {
    if chart.structure != StructureKind::Projective {
        return Err(Error::ScenarioMismatch("projective-metric scenario needs a projective chart".into()));
    }
    grid.validate()?;
    let n = chart.dim();
    let base = grid.center();
    let c0 = curvature_tensors(chart, &base)?;
    let lambda = (c0.g_inv.component_mul(&c0.ricci)).sum() / n as f64;
    let points = grid.points();
    let einstein_residual = einstein_verify(chart, &ScalarField::Constant { value: 1.0 }, lambda, &points, 0.0)?;
    if einstein_residual > 1e-5 * lambda.abs().max(1.0) {
        return Err(Error::ScenarioMismatch(format!("chart metric is not Einstein (residual {einstein_residual:e})")));
    }

    let conn = TractorConnection::new(chart.clone());
    let radius = grid.lo.iter().zip(&grid.hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max);
    let family = LoopFamily::seeded(&conn, &base, family_size, radius, seed);
    let hol = holonomy_algebra(&conn, &base, &family, 2 * family_size, 1e-6)?;
    let kernel = find_parallel_metrics(&hol.basis, n + 1);

    let mut report = ProjectiveMetricReport {
        einstein_constant: lambda,
        einstein_residual,
        holonomy_dim: hol.basis.dim(),
        parallel_metric_dim: kernel.len(),
        metric: None,
        signature: None,
        kernel_residual: None,
        transport_residual: None,
        strata: None,
    };
    if lambda.abs() < 1e-9 {
        return Ok(report);
    }
    let c = (n as f64 - 1.0) / lambda;
    let scale_metric = |g: &DMatrix<f64>| {
        let mut h = DMatrix::zeros(n + 1, n + 1);
        h.view_mut((0, 0), (n, n)).copy_from(g);
        h[(n, n)] = c;
        h
    };
    let h0 = scale_metric(&c0.g);
    let unit = &h0 / h0.norm();
    let projected = kernel.iter().fold(DMatrix::zeros(n + 1, n + 1), |acc, k| acc + k * k.dot(&unit));
    report.kernel_residual = Some((&unit - projected).norm());

    let metric = ParallelMetric::new(conn, base, h0.clone())?;
    let residual = points
        .par_iter()
        .map(|x| Ok((metric.evaluate(x)? - scale_metric(&chart.metric_at(x)?)).amax()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report.transport_residual = Some(residual);
    report.signature = Some(metric_signature(&h0)?);
    report.metric = Some(h0.row_iter().map(|r| r.iter().copied().collect()).collect());
    report.strata = Some(zero_strata(SectionField::Metric(&metric), grid, tol, true)?);
    Ok(report)
}
