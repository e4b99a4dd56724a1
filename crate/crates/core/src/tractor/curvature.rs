use nalgebra::DMatrix;

use super::metric::{ChartGeometry, DerivativeEngine, MetricJet, StructureKind};
use crate::error::Result;
use crate::jet::Jet;

/// Curvature of the Levi-Civita connection at one chart point.
///
/// Conventions: `R^a_{bcd} = d_c Γ^a_{db} - d_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} - Γ^a_{de} Γ^e_{cb}`,
/// `Ric_{bd} = R^a_{bad}`, so the unit sphere has `Ric = (n-1) g`.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub dim: usize,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `christoffel[a][(b, c)] = Γ^a_{bc}`
    pub christoffel: Vec<DMatrix<f64>>,
    /// `dchristoffel[e][a][(b, c)] = d_e Γ^a_{bc}`
    pub dchristoffel: Vec<Vec<DMatrix<f64>>>,
    /// `riemann[a * n^3 + b * n^2 + c * n + d] = R^a_{bcd}`
    pub riemann: Vec<f64>,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub schouten: DMatrix<f64>,
}

impl CurvatureData {
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    /// Largest `|R^a_{bcd} + R^a_{cdb} + R^a_{dbc}|`.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.riemann(a, b, c, d) + self.riemann(a, c, d, b) + self.riemann(a, d, b, c);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn ricci_asymmetry(&self) -> f64 {
        (&self.ricci - self.ricci.transpose()).amax()
    }

    /// Largest component of `Ric - lambda g`.
    pub fn einstein_residual(&self, lambda: f64) -> f64 {
        (&self.ricci - &self.g * lambda).amax()
    }
}

/// Bianchi tolerance for the configured engine.
pub fn bianchi_tolerance(engine: DerivativeEngine) -> f64 {
    match engine {
        DerivativeEngine::Autodiff => 1e-6,
        DerivativeEngine::CentralDifference { .. } => 1e-4,
    }
}

/// Christoffel symbols, Riemann, Ricci, scalar curvature and the Schouten
/// tensor of the chart's structure kind at `x`.
///
/// Conformal Schouten is `(Ric - Scal/(2(n-1)) g)/(n-2)`; in dimension 2,
/// where that formula is undefined, `P = (Scal/4) g` is used (the trace
/// part only; there is no Weyl or Cotton information in dimension 2).
/// Projective Schouten is `Ric/(n-1)`.
pub fn curvature_tensors(chart: &ChartGeometry, x: &[f64]) -> Result<CurvatureData> {
    Ok(curvature_from_jet(&chart.metric_jet(x)?, chart.structure))
}

impl MetricJet {
    /// Metric 2-jet from row-major component jets.
    pub fn from_jets(n: usize, comps: &[Jet]) -> Result<Self> {
        let g = DMatrix::from_fn(n, n, |a, b| comps[a * n + b].v);
        let g_inv = crate::lie::checked_inverse(&g)?;
        let dg = (0..n).map(|k| DMatrix::from_fn(n, n, |a, b| comps[a * n + b].d[k])).collect();
        let ddg = (0..n)
            .map(|k| (0..n).map(|l| DMatrix::from_fn(n, n, |a, b| comps[a * n + b].h[k][l])).collect())
            .collect();
        Ok(MetricJet { g, g_inv, dg, ddg })
    }
}

/// Curvature from a metric 2-jet.
pub fn curvature_from_jet(jet: &MetricJet, structure: StructureKind) -> CurvatureData {
    let n = jet.g.nrows();
    let (g, gi) = (&jet.g, &jet.g_inv);

    // lowered Γ_{d b c} = 1/2 (d_b g_dc + d_c g_db - d_d g_bc) and its derivatives
    let low = |d: usize, b: usize, c: usize| 0.5 * (jet.dg[b][(d, c)] + jet.dg[c][(d, b)] - jet.dg[d][(b, c)]);
    let dlow = |e: usize, d: usize, b: usize, c: usize| {
        0.5 * (jet.ddg[e][b][(d, c)] + jet.ddg[e][c][(d, b)] - jet.ddg[e][d][(b, c)])
    };
    let mut christoffel = vec![DMatrix::zeros(n, n); n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                christoffel[a][(b, c)] = (0..n).map(|d| gi[(a, d)] * low(d, b, c)).sum();
            }
        }
    }
    // d_e g^{ad} = -g^{ap} d_e g_pq g^{qd}
    let dginv: Vec<DMatrix<f64>> = (0..n).map(|e| -(gi * &jet.dg[e] * gi)).collect();
    let mut dchristoffel = vec![vec![DMatrix::zeros(n, n); n]; n];
    for e in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    dchristoffel[e][a][(b, c)] =
                        (0..n).map(|d| dginv[e][(a, d)] * low(d, b, c) + gi[(a, d)] * dlow(e, d, b, c)).sum();
                }
            }
        }
    }
    let mut riemann = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = dchristoffel[c][a][(d, b)] - dchristoffel[d][a][(c, b)];
                    for e in 0..n {
                        r += christoffel[a][(c, e)] * christoffel[e][(d, b)] - christoffel[a][(d, e)] * christoffel[e][(c, b)];
                    }
                    riemann[((a * n + b) * n + c) * n + d] = r;
                }
            }
        }
    }
    let ricci = DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| riemann[((a * n + b) * n + a) * n + d]).sum());
    let scalar = (gi.component_mul(&ricci)).sum();
    let nf = n as f64;
    let schouten = match structure {
        StructureKind::Conformal if n > 2 => (&ricci - g * (scalar / (2.0 * (nf - 1.0)))) / (nf - 2.0),
        StructureKind::Conformal => g * (scalar / 4.0),
        StructureKind::Projective => &ricci / (nf - 1.0).max(1.0),
    };
    CurvatureData {
        dim: n,
        g: jet.g.clone(),
        g_inv: jet.g_inv.clone(),
        christoffel,
        dchristoffel,
        riemann,
        ricci,
        scalar,
        schouten,
    }
}
