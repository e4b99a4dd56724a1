use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::curvature::{curvature_tensors, CurvatureData};
use super::metric::{ChartGeometry, StructureKind};
use crate::error::{Error, Result};
use crate::forms::SymmetricForm;
use crate::lie::AlgebraTag;

/// Fixed slot ranges of the chart-adapted tractor frame.
///
/// `top` is the projecting slot (the density `σ` for conformal structures,
/// the weighted vector `ν` for projective ones); `bottom` spans the
/// distinguished line `T^1`. `T^0` is `middle + bottom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLayout {
    pub top: Range<usize>,
    pub middle: Range<usize>,
    pub bottom: Range<usize>,
}

impl SlotLayout {
    pub fn fiber_dim(&self) -> usize {
        self.bottom.end
    }

    /// Slot ranges of the filtration `T^1 ⊂ T^0`, innermost first, as the
    /// complement each membership test must annihilate.
    pub fn filtration_complements(&self) -> Vec<Range<usize>> {
        vec![self.top.start..self.middle.end, self.top.clone()]
    }
}

/// Tractor connection of a chart, `∇_ξ s = ∂_ξ s + A(ξ) s` in slot components.
///
/// Conformal slots `(σ, μ_a, ρ)`:
/// `∇_a σ = ∂_a σ - μ_a`,
/// `∇_a μ_b = ∂_a μ_b - Γ^c_{ab} μ_c + P_{ab} σ + g_{ab} ρ`,
/// `∇_a ρ = ∂_a ρ - P_a^b μ_b`,
/// with tractor metric `h = 2 σ ρ + g^{ab} μ_a μ_b`.
///
/// Projective slots `(ν^b, ρ)`:
/// `∇_a ν^b = ∂_a ν^b + Γ^b_{ac} ν^c + δ_a^b ρ`,
/// `∇_a ρ = ∂_a ρ - P_{ab} ν^b`,
/// densities trivialized by the volume form of the chart metric.
#[derive(Debug, Clone)]
pub struct TractorConnection {
    pub chart: ChartGeometry,
}

impl TractorConnection {
    pub fn new(chart: ChartGeometry) -> Self {
        TractorConnection { chart }
    }

    pub fn kind(&self) -> StructureKind {
        self.chart.structure
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn layout(&self) -> SlotLayout {
        let n = self.dim();
        match self.kind() {
            StructureKind::Conformal => SlotLayout { top: 0..1, middle: 1..n + 1, bottom: n + 1..n + 2 },
            StructureKind::Projective => SlotLayout { top: 0..n, middle: n..n, bottom: n..n + 1 },
        }
    }

    pub fn fiber_dim(&self) -> usize {
        self.layout().fiber_dim()
    }

    /// Coordinate connection matrices `A_a`, `a = 0..n`, from precomputed curvature.
    pub fn matrices_from(&self, c: &CurvatureData) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        let m = self.fiber_dim();
        let (gam, p) = (&c.christoffel, &c.schouten);
        (0..n)
            .map(|a| {
                let mut am = DMatrix::zeros(m, m);
                match self.kind() {
                    StructureKind::Conformal => {
                        let rho = n + 1;
                        am[(0, 1 + a)] = -1.0;
                        for b in 0..n {
                            am[(1 + b, 0)] = p[(a, b)];
                            am[(1 + b, rho)] = c.g[(a, b)];
                            for k in 0..n {
                                am[(1 + b, 1 + k)] = -gam[k][(a, b)];
                            }
                        }
                        // P_a^b = P_{ac} g^{cb}
                        let pa = &c.g_inv * p.row(a).transpose();
                        for b in 0..n {
                            am[(rho, 1 + b)] = -pa[b];
                        }
                    }
                    StructureKind::Projective => {
                        for b in 0..n {
                            for k in 0..n {
                                am[(b, k)] = gam[b][(a, k)];
                            }
                            am[(n, b)] = -p[(a, b)];
                        }
                        am[(a, n)] = 1.0;
                    }
                }
                am
            })
            .collect()
    }

    pub fn matrices(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        Ok(self.matrices_from(&curvature_tensors(&self.chart, x)?))
    }

    /// `A(ξ) = ξ^a A_a`.
    pub fn form(&self, x: &[f64], xi: &[f64]) -> Result<DMatrix<f64>> {
        let mats = self.matrices(x)?;
        Ok(contract(&mats, xi))
    }

    /// Tractor metric in the slot frame at `x` (conformal structures only).
    pub fn tractor_metric(&self, x: &[f64]) -> Result<Option<DMatrix<f64>>> {
        match self.kind() {
            StructureKind::Conformal => {
                let n = self.dim();
                let gi = crate::lie::checked_inverse(&self.chart.metric_at(x)?)?;
                let mut h = DMatrix::zeros(n + 2, n + 2);
                h[(0, n + 1)] = 1.0;
                h[(n + 1, 0)] = 1.0;
                h.view_mut((1, 1), (n, n)).copy_from(&gi);
                Ok(Some(h))
            }
            StructureKind::Projective => Ok(None),
        }
    }

    /// Lie algebra that holonomy at `x` lives in.
    pub fn structure_algebra(&self, x: &[f64]) -> Result<AlgebraTag> {
        Ok(match self.tractor_metric(x)? {
            Some(h) => AlgebraTag::Orthogonal(SymmetricForm::with_tolerance(h, 1e-9)?),
            None => AlgebraTag::GeneralLinear(self.fiber_dim()),
        })
    }

    /// Conformal tractor `D σ = (σ, ∇σ, -(Δσ + J σ)/n)` of a density from its
    /// value, gradient and Hessian at `x`, with `J = g^{ab} P_{ab}`.
    pub fn density_tractor(&self, x: &[f64], sigma: f64, grad: &[f64], hess: &DMatrix<f64>) -> Result<DVector<f64>> {
        if self.kind() != StructureKind::Conformal {
            return Err(Error::ScenarioMismatch("density tractors are defined for conformal charts".into()));
        }
        let n = self.dim();
        let c = curvature_tensors(&self.chart, x)?;
        // Δσ = g^{ab}(∂_a∂_b σ - Γ^c_{ab} ∂_c σ)
        let mut lap = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut cov = hess[(a, b)];
                for k in 0..n {
                    cov -= c.christoffel[k][(a, b)] * grad[k];
                }
                lap += c.g_inv[(a, b)] * cov;
            }
        }
        let j = c.g_inv.component_mul(&c.schouten).sum();
        let mut s = DVector::zeros(n + 2);
        s[0] = sigma;
        for a in 0..n {
            s[1 + a] = grad[a];
        }
        s[n + 1] = -(lap + j * sigma) / n as f64;
        Ok(s)
    }
}

pub(crate) fn contract(mats: &[DMatrix<f64>], xi: &[f64]) -> DMatrix<f64> {
    let m = mats[0].nrows();
    mats.iter().zip(xi).fold(DMatrix::zeros(m, m), |acc, (a, v)| acc + a * *v)
}

/// `∇_ξ s = ∂_ξ s + A(ξ) s` from the value of `s` and its derivative along `ξ`.
pub fn tractor_derivative(
    conn: &TractorConnection,
    x: &[f64],
    xi: &[f64],
    value: &DVector<f64>,
    derivative: &DVector<f64>,
) -> Result<DVector<f64>> {
    let m = conn.fiber_dim();
    if value.len() != m || derivative.len() != m || xi.len() != conn.dim() {
        return Err(Error::DimensionError("section jet or direction has the wrong size".into()));
    }
    Ok(derivative + conn.form(x, xi)? * value)
}
