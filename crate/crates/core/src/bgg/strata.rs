use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ParallelMetric, ParallelSection};
use crate::error::{Error, Result};
use crate::forms::{Form, Signature, SymmetricForm};
use crate::model::{expected_labels, GEOMETRY_TOL, HomogeneousModel, Label, ReductionDatum, Tolerances};
use crate::report::{Diagnostics, SampleRecord, StrataReport, StratumGeometry};
use crate::tractor::StructureKind;

/// Bisection steps when locating a sign change of `σ` on a grid edge.
const BISECTION_STEPS: usize = 60;
/// Absolute floor of the zero-membership tolerance.
const MEMBERSHIP_FLOOR: f64 = 1e-10;
/// Step for finite-difference jets of projective solutions.
const FD_STEP: f64 = 1e-3;

/// Tensor-product grid on a box, `resolution` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: usize,
}

impl Grid {
    /// `[-half, half]^n`.
    pub fn cube(n: usize, half: f64, resolution: usize) -> Self {
        Grid { lo: vec![-half; n], hi: vec![half; n], resolution }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.len() != self.hi.len() || self.lo.is_empty() {
            return Err(Error::DimensionError("grid bounds must have equal nonzero length".into()));
        }
        if self.resolution < 2 || self.lo.iter().zip(&self.hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidDatum("grid needs resolution >= 2 and lo < hi".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let t = i as f64 / (self.resolution - 1) as f64;
        self.lo[axis] + t * (self.hi[axis] - self.lo[axis])
    }

    fn multi_index(&self, mut k: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|_| {
                let i = k % self.resolution;
                k /= self.resolution;
                i
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in lexicographic order (first axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|k| self.multi_index(k).iter().enumerate().map(|(a, i)| self.coord(a, *i)).collect())
            .collect()
    }

    /// Index pairs of axis-neighbors.
    fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.len() {
            let idx = self.multi_index(k);
            let mut stride = 1;
            for &i in &idx {
                if i + 1 < self.resolution {
                    out.push((k, k + stride));
                }
                stride *= self.resolution;
            }
        }
        out
    }
}

/// A parallel object whose top-slot solution is stratified.
#[derive(Debug, Clone, Copy)]
pub enum SectionField<'a> {
    /// Conformal standard tractor.
    Tractor(&'a ParallelSection),
    /// Projective tractor metric.
    Metric(&'a ParallelMetric),
}

struct Evaluation {
    label: Label,
    membership: Vec<bool>,
    diagnostics: Diagnostics,
    geometry: Option<StratumGeometry>,
}

fn classify_geometry(grad_norm: f64, hessian_det: Option<f64>) -> StratumGeometry {
    if grad_norm > 10.0 * GEOMETRY_TOL {
        StratumGeometry::Hypersurface
    } else if grad_norm <= GEOMETRY_TOL && hessian_det.is_some_and(|d| d.abs() > GEOMETRY_TOL) {
        StratumGeometry::Isolated
    } else {
        StratumGeometry::Unresolved
    }
}

fn open_label(value: f64, null: bool) -> Label {
    match (value > 0.0, null) {
        (true, false) => Label::Plus,
        (false, false) => Label::Minus,
        (true, true) => Label::OpenPlus,
        (false, true) => Label::OpenMinus,
    }
}

impl SectionField<'_> {
    fn conn(&self) -> &crate::tractor::TractorConnection {
        match self {
            SectionField::Tractor(s) => &s.conn,
            SectionField::Metric(m) => &m.conn,
        }
    }

    fn is_null(&self) -> bool {
        match self {
            SectionField::Tractor(s) => {
                s.g_type().is_some_and(|h| h.abs() <= 1e-9 * s.base_value.norm_squared())
            }
            SectionField::Metric(_) => false,
        }
    }

    /// The scalar normal solution `σ` at `x`, transported from a nearby point.
    fn sigma_from(&self, from: &[f64], x: &[f64]) -> Result<f64> {
        match self {
            SectionField::Tractor(s) => Ok(s.evaluate_from(from, x)?[0]),
            SectionField::Metric(m) => {
                let r = m.conn.layout().bottom.start;
                Ok(m.evaluate_from(from, x)?[(r, r)])
            }
        }
    }

    fn sigma(&self, x: &[f64]) -> Result<f64> {
        match self {
            SectionField::Tractor(s) => Ok(s.evaluate(x)?[0]),
            SectionField::Metric(m) => m.solution(x),
        }
    }

    /// Gradient and Hessian of `σ` at `x`.
    fn sigma_jet(&self, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        match self {
            SectionField::Tractor(s) => {
                let (_, g, h) = s.density_jet(x)?;
                Ok((g, h))
            }
            SectionField::Metric(_) => {
                let n = x.len();
                let at = |shift: &[(usize, f64)]| {
                    let mut y = x.to_vec();
                    for (i, d) in shift {
                        y[*i] += d;
                    }
                    self.sigma_from(x, &y)
                };
                let h = FD_STEP;
                let f0 = self.sigma(x)?;
                let mut grad = vec![0.0; n];
                let mut hess = DMatrix::zeros(n, n);
                for i in 0..n {
                    let (p, m) = (at(&[(i, h)])?, at(&[(i, -h)])?);
                    grad[i] = (p - m) / (2.0 * h);
                    hess[(i, i)] = (p - 2.0 * f0 + m) / (h * h);
                    for j in i + 1..n {
                        let v = (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                            + at(&[(i, -h), (j, -h)])?)
                            / (4.0 * h * h);
                        hess[(i, j)] = v;
                        hess[(j, i)] = v;
                    }
                }
                Ok((grad, hess))
            }
        }
    }

    fn evaluate_point(&self, x: &[f64], tol: &Tolerances) -> Result<Evaluation> {
        let zt = tol.zero_tol;
        let band = tol.zero_tol * tol.ambiguity_factor;
        match self {
            SectionField::Tractor(s) => {
                let v = s.evaluate(x)?;
                let layout = s.conn.layout();
                let scale = v.norm().max(f64::MIN_POSITIVE);
                let thresh = (zt * scale).max(MEMBERSHIP_FLOOR);
                let top = v.rows(layout.top.start, layout.top.len()).amax();
                let middle = v.rows(layout.middle.start, layout.middle.len()).amax();
                let in_t0 = top <= thresh;
                let in_t1 = in_t0 && middle <= thresh;
                let sigma = v[layout.top.start];
                let null = self.is_null();
                let rho = v[layout.bottom.start];
                let label = if in_t1 {
                    if rho > 0.0 { Label::IsolatedPlus } else { Label::IsolatedMinus }
                } else if in_t0 {
                    if !null {
                        Label::Zero
                    } else if middle <= band * scale {
                        Label::Ambiguous
                    } else {
                        Label::Hypersurface
                    }
                } else if sigma.abs() <= band * scale {
                    Label::Ambiguous
                } else {
                    open_label(sigma, null)
                };
                let mut diagnostics = Diagnostics {
                    value: sigma,
                    invariant: s.invariant_at(x)?,
                    ..Default::default()
                };
                let mut geometry = None;
                if in_t0 {
                    let (grad, hess) = self.sigma_jet(x)?;
                    let g = DVector::from_vec(grad).norm();
                    let det = hess.determinant();
                    diagnostics.grad_norm = Some(g);
                    diagnostics.hessian_det = Some(det);
                    geometry = Some(classify_geometry(g, Some(det)));
                }
                Ok(Evaluation { label, membership: vec![in_t1, in_t0], diagnostics, geometry })
            }
            SectionField::Metric(m) => {
                let h = m.evaluate(x)?;
                let r = m.conn.layout().bottom.start;
                let sigma = h[(r, r)];
                let scale = h.amax().max(f64::MIN_POSITIVE);
                let zero = sigma.abs() <= (zt * scale).max(MEMBERSHIP_FLOOR);
                let label = if zero {
                    Label::Zero
                } else if sigma.abs() <= band * scale {
                    Label::Ambiguous
                } else {
                    open_label(sigma, false)
                };
                let mut diagnostics = Diagnostics { value: sigma, ..Default::default() };
                let mut geometry = None;
                if zero {
                    let (grad, hess) = self.sigma_jet(x)?;
                    let g = DVector::from_vec(grad).norm();
                    let det = hess.determinant();
                    diagnostics.grad_norm = Some(g);
                    diagnostics.hessian_det = Some(det);
                    geometry = Some(classify_geometry(g, Some(det)));
                }
                Ok(Evaluation { label, membership: vec![zero], diagnostics, geometry })
            }
        }
    }

    /// Model orbit labels of the matching homogeneous scenario.
    fn model_labels(&self) -> Result<Vec<Label>> {
        let conn = self.conn();
        let (p, q) = conn.chart.signature();
        match self {
            SectionField::Tractor(s) => {
                if conn.kind() != StructureKind::Conformal {
                    return Err(Error::ScenarioMismatch("tractor sections are stratified on conformal charts".into()));
                }
                let model = HomogeneousModel::conformal(p, q)?;
                let big = p + q + 2;
                let mut v = DVector::zeros(big);
                match s.g_type() {
                    _ if self.is_null() => {
                        v[0] = 1.0;
                        v[big - 1] = 1.0;
                    }
                    Some(h) if h > 0.0 => v[0] = 1.0,
                    _ => v[big - 1] = 1.0,
                }
                expected_labels(&model, &ReductionDatum::Vector(v))
            }
            SectionField::Metric(m) => {
                let sig = metric_signature(&m.base_value)?;
                let n = conn.dim();
                let model = HomogeneousModel::projective(n)?;
                let mut entries = vec![1.0; sig.positive];
                entries.extend(vec![-1.0; sig.negative]);
                if sig.null > 0 {
                    return Err(Error::DegenerateForm("parallel metric is degenerate".into()));
                }
                expected_labels(&model, &ReductionDatum::SymmetricForm(SymmetricForm::diagonal(&entries)))
            }
        }
    }
}

pub(crate) fn metric_signature(h: &DMatrix<f64>) -> Result<Signature> {
    Ok(SymmetricForm::with_tolerance(crate::linalg::symmetrize(h), 1e-9)?.signature())
}

/// Per-point membership in the filtration zero loci `Z^U(σ)` of the
/// section's top slot, labels by the model classifier, and stratum
/// diagnostics at zero points. With `refine`, each grid edge across which
/// `σ` changes sign contributes one extra sample on the zero locus found by
/// bisection.
pub fn zero_strata(field: SectionField<'_>, grid: &Grid, tol: &Tolerances, refine: bool) -> Result<StrataReport> {
    grid.validate()?;
    let conn = field.conn();
    if grid.dim() != conn.dim() {
        return Err(Error::DimensionError("grid dimension differs from chart dimension".into()));
    }
    let mut points = grid.points();
    let sigmas: Vec<f64> = points.par_iter().map(|x| field.sigma(x)).collect::<Result<_>>()?;
    if refine {
        let crossings: Vec<(usize, usize)> = grid
            .edges()
            .into_iter()
            .filter(|(a, b)| sigmas[*a] * sigmas[*b] < 0.0)
            .collect();
        let refined: Vec<Vec<f64>> = crossings
            .par_iter()
            .map(|(a, b)| {
                let (xa, xb) = (&points[*a], &points[*b]);
                let sa = sigmas[*a];
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    let y: Vec<f64> = xa.iter().zip(xb.iter()).map(|(p, q)| p + mid * (q - p)).collect();
                    if field.sigma_from(xa, &y)? * sa > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = 0.5 * (lo + hi);
                Ok(xa.iter().zip(xb.iter()).map(|(p, q)| p + t * (q - p)).collect())
            })
            .collect::<Result<_>>()?;
        points.extend(refined);
    }
    let evals: Vec<Evaluation> = points.par_iter().map(|x| field.evaluate_point(x, tol)).collect::<Result<_>>()?;
    let mut geometry: BTreeMap<String, StratumGeometry> = BTreeMap::new();
    let mut samples = Vec::with_capacity(points.len());
    for (i, (x, e)) in points.into_iter().zip(evals).enumerate() {
        let name = e.label.as_str().to_string();
        if e.label != Label::Ambiguous {
            let g = e.geometry.unwrap_or(StratumGeometry::Open);
            geometry
                .entry(name.clone())
                .and_modify(|cur| {
                    if *cur != g {
                        *cur = StratumGeometry::Unresolved
                    }
                })
                .or_insert(g);
        }
        samples.push(SampleRecord { index: i, coords: x, label: name, zero_membership: e.membership, diagnostics: e.diagnostics });
    }
    let expected = field.model_labels()?.iter().map(|l| l.as_str().to_string()).collect();
    let scenario = match field {
        SectionField::Tractor(_) => "conformal_parallel_tractor",
        SectionField::Metric(_) => "projective_parallel_metric",
    };
    Ok(StrataReport::new(scenario, samples, expected, geometry))
}

/// Curved orbit decomposition of a chart by the P-type of a parallel
/// section. Fails if a label outside the model's orbit set appears or if
/// `h(s, s)` drifts by more than the path tolerance over the grid.
pub fn curved_orbit_decompose(field: SectionField<'_>, grid: &Grid, tol: &Tolerances) -> Result<StrataReport> {
    let report = zero_strata(field, grid, tol, true)?;
    if let SectionField::Tractor(s) = field {
        if let Some(h0) = s.g_type() {
            let drift = report
                .samples
                .iter()
                .filter_map(|r| r.diagnostics.invariant)
                .fold(0.0f64, |a, h| a.max((h - h0).abs()));
            if drift > super::PATH_TOL * h0.abs().max(1.0) {
                return Err(Error::NumericalError(format!("h(s, s) drifts by {drift:e} over the grid")));
            }
        }
    }
    if !report.labels_within_expected() {
        return Err(Error::ScenarioMismatch(format!(
            "observed labels {:?} not among model orbits {:?}",
            report.summary.observed_labels, report.summary.expected_labels
        )));
    }
    Ok(report)
}
