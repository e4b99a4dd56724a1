//! Parallel tractors, their normal BGG solutions, zero loci and the curved
//! orbit decompositions they induce on a chart.

mod einstein;
mod strata;


use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::AlgebraBasis;
use crate::linalg;
use crate::tractor::{transport_matrix, Path, StructureKind, TractorConnection, MAX_STEPS, TRANSPORT_TOL};

pub use einstein::{
    einstein_verify, projective_metric_scenario, DensityJet, ProjectiveMetricReport, EINSTEIN_MARGIN,
};
pub use strata::{curved_orbit_decompose, zero_strata, Grid, SectionField};

/// Path-independence tolerance for parallel sections on simply connected charts.
pub const PATH_TOL: f64 = 1e-7;

fn cache_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Transport matrix from the basepoint to `x` along the straight segment.
fn radial_transport(conn: &TractorConnection, basepoint: &[f64], x: &[f64]) -> Result<DMatrix<f64>> {
    transport_matrix(conn, &Path::line(basepoint, x), TRANSPORT_TOL, MAX_STEPS)
}

/// A tractor fixed at a basepoint and extended over the chart by radial
/// transport. Values are memoized per point.
#[derive(Debug)]
pub struct ParallelSection {
    pub conn: TractorConnection,
    pub basepoint: Vec<f64>,
    pub base_value: DVector<f64>,
    cache: Mutex<HashMap<Vec<u64>, DVector<f64>>>,
}

impl Clone for ParallelSection {
    fn clone(&self) -> Self {
        ParallelSection::new(self.conn.clone(), self.basepoint.clone(), self.base_value.clone())
            .expect("cloned section was valid")
    }
}

impl ParallelSection {
    pub fn new(conn: TractorConnection, basepoint: Vec<f64>, base_value: DVector<f64>) -> Result<Self> {
        conn.chart.check_point(&basepoint)?;
        if base_value.len() != conn.fiber_dim() {
            return Err(Error::DimensionError(format!("tractor must have length {}", conn.fiber_dim())));
        }
        Ok(ParallelSection { conn, basepoint, base_value, cache: Mutex::new(HashMap::new()) })
    }

    /// Section through the tractor `D σ` of a closed-form density at the basepoint.
    pub fn from_density(conn: TractorConnection, basepoint: Vec<f64>, sigma: &crate::tractor::ScalarField) -> Result<Self> {
        let (v, grad, hess) = sigma.jet(&basepoint);
        let s = conn.density_tractor(&basepoint, v, &grad, &hess)?;
        ParallelSection::new(conn, basepoint, s)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<DVector<f64>> {
        let key = cache_key(x);
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let v = radial_transport(&self.conn, &self.basepoint, x)? * &self.base_value;
        self.cache.lock().expect("cache poisoned").insert(key, v.clone());
        Ok(v)
    }

    /// Value at `y` transported from the (cached) value at a nearby `x`.
    pub fn evaluate_from(&self, x: &[f64], y: &[f64]) -> Result<DVector<f64>> {
        let sx = self.evaluate(x)?;
        Ok(transport_matrix(&self.conn, &Path::line(x, y), TRANSPORT_TOL, MAX_STEPS)? * sx)
    }

    /// Tractor-metric invariant `h(s, s)` at `x` (conformal sections).
    pub fn invariant_at(&self, x: &[f64]) -> Result<Option<f64>> {
        let Some(h) = self.conn.tractor_metric(x)? else { return Ok(None) };
        let s = self.evaluate(x)?;
        Ok(Some((s.transpose() * h * &s)[(0, 0)]))
    }

    /// The G-type `h(s, s)` read at the basepoint.
    pub fn g_type(&self) -> Option<f64> {
        let h = self.conn.tractor_metric(&self.basepoint).ok()??;
        Some((self.base_value.transpose() * h * &self.base_value)[(0, 0)])
    }

    /// Difference between the radial value at `x` and the value transported
    /// along the two-leg path through `via`.
    pub fn path_discrepancy(&self, x: &[f64], via: &[f64]) -> Result<f64> {
        let direct = self.evaluate(x)?;
        let path = Path::Polyline { points: vec![self.basepoint.clone(), via.to_vec(), x.to_vec()] };
        let other = transport_matrix(&self.conn, &path, TRANSPORT_TOL, MAX_STEPS)? * &self.base_value;
        Ok((direct - other).amax())
    }

    /// Second-order jet of the top slot `σ` at `x`, read off the parallel
    /// section itself: `∂σ = μ`, `∂_a∂_b σ = Γ^c_{ab} μ_c - P_{ab} σ - g_{ab} ρ`.
    pub fn density_jet(&self, x: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
        if self.conn.kind() != StructureKind::Conformal {
            return Err(Error::ScenarioMismatch("density jets come from conformal sections".into()));
        }
        let n = self.conn.dim();
        let s = self.evaluate(x)?;
        let c = crate::tractor::curvature_tensors(&self.conn.chart, x)?;
        let mu: Vec<f64> = (0..n).map(|a| s[1 + a]).collect();
        let hess = DMatrix::from_fn(n, n, |a, b| {
            let gamma: f64 = (0..n).map(|k| c.christoffel[k][(a, b)] * mu[k]).sum();
            gamma - c.schouten[(a, b)] * s[0] - c.g[(a, b)] * s[n + 1]
        });
        Ok((s[0], mu, hess))
    }
}

/// A parallel bilinear form on the projective tractor bundle, fixed at a
/// basepoint and extended by radial transport: `H_x = T^{-T} H T^{-1}`.
#[derive(Debug)]
pub struct ParallelMetric {
    pub conn: TractorConnection,
    pub basepoint: Vec<f64>,
    pub base_value: DMatrix<f64>,
    cache: Mutex<HashMap<Vec<u64>, DMatrix<f64>>>,
}

impl ParallelMetric {
    pub fn new(conn: TractorConnection, basepoint: Vec<f64>, base_value: DMatrix<f64>) -> Result<Self> {
        conn.chart.check_point(&basepoint)?;
        let m = conn.fiber_dim();
        if base_value.shape() != (m, m) {
            return Err(Error::DimensionError(format!("tractor metric must be {m} x {m}")));
        }
        Ok(ParallelMetric { conn, basepoint, base_value, cache: Mutex::new(HashMap::new()) })
    }

    fn pushed(&self, t: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let ti = crate::lie::checked_inverse(t)?;
        Ok(ti.transpose() * h * ti)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let key = cache_key(x);
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let h = self.pushed(&radial_transport(&self.conn, &self.basepoint, x)?, &self.base_value)?;
        self.cache.lock().expect("cache poisoned").insert(key, h.clone());
        Ok(h)
    }

    pub fn evaluate_from(&self, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        let hx = self.evaluate(x)?;
        self.pushed(&transport_matrix(&self.conn, &Path::line(x, y), TRANSPORT_TOL, MAX_STEPS)?, &hx)
    }

    /// Normal solution `σ = H(X, X)` with `X` spanning the bottom slot.
    pub fn solution(&self, x: &[f64]) -> Result<f64> {
        let r = self.conn.layout().bottom.start;
        Ok(self.evaluate(x)?[(r, r)])
    }
}

/// A normal BGG solution: the top slot of a parallel section.
#[derive(Debug, Clone)]
pub struct NormalSolution<'a> {
    pub source: &'a ParallelSection,
}

impl NormalSolution<'_> {
    pub fn value(&self, x: &[f64]) -> Result<DVector<f64>> {
        bgg_project(self.source, x)
    }
}

/// Top-slot projection `Π(s)(x)`.
pub fn bgg_project(s: &ParallelSection, x: &[f64]) -> Result<DVector<f64>> {
    let v = s.evaluate(x)?;
    let top = s.conn.layout().top;
    Ok(v.rows(top.start, top.len()).into_owned())
}

/// Joint kernel `{v : A v = 0 for all A in the holonomy algebra}` at the
/// basepoint, each basis vector extended to a parallel section.
pub fn find_parallel_sections(conn: &TractorConnection, holonomy: &AlgebraBasis, basepoint: &[f64]) -> Result<Vec<ParallelSection>> {
    let m = conn.fiber_dim();
    let kernel = if holonomy.dim() == 0 {
        DMatrix::identity(m, m)
    } else {
        let stacked = DMatrix::from_fn(m * holonomy.dim(), m, |r, c| holonomy.elements[r / m][(r % m, c)]);
        linalg::nullspace(&stacked, 1e-6)
    };
    kernel
        .column_iter()
        .map(|c| ParallelSection::new(conn.clone(), basepoint.to_vec(), c.into_owned()))
        .collect()
}

/// Symmetric bilinear forms `H` on the fiber with `A^T H + H A = 0` for all
/// holonomy elements: the parallel metrics, as an orthonormal basis.
pub fn find_parallel_metrics(holonomy: &AlgebraBasis, size: usize) -> Vec<DMatrix<f64>> {
    // coordinates: upper triangle of H
    let idx: Vec<(usize, usize)> = (0..size).flat_map(|i| (i..size).map(move |j| (i, j))).collect();
    let sym = |k: usize| {
        let (i, j) = idx[k];
        let mut h = DMatrix::zeros(size, size);
        h[(i, j)] = 1.0;
        h[(j, i)] = 1.0;
        h
    };
    if holonomy.dim() == 0 {
        return (0..idx.len()).map(|k| sym(k) / sym(k).norm()).collect();
    }
    let rows = holonomy.dim() * size * size;
    let mut system = DMatrix::zeros(rows, idx.len());
    for k in 0..idx.len() {
        let h = sym(k);
        for (e, a) in holonomy.elements.iter().enumerate() {
            let img = a.transpose() * &h + &h * a;
            for (r, v) in img.iter().enumerate() {
                system[(e * size * size + r, k)] = *v;
            }
        }
    }
    let kernel = linalg::nullspace(&system, 1e-6);
    kernel
        .column_iter()
        .map(|c| {
            let h = (0..idx.len()).fold(DMatrix::zeros(size, size), |acc, k| acc + sym(k) * c[k]);
            let norm = h.norm();
            h / norm
        })
        .collect()
}

/// Gram determinant of the unit-normalized `σ` sample vectors of the given
/// sections; nonzero iff `Π` separates them on the sample.
pub fn projection_gram_determinant(sections: &[ParallelSection], samples: &[Vec<f64>]) -> Result<f64> {
    let mut rows = Vec::with_capacity(sections.len());
    for s in sections {
        let mut v = Vec::new();
        for x in samples {
            v.extend(bgg_project(s, x)?.iter().copied());
        }
        let v = DVector::from_vec(v);
        let norm = v.norm();
        rows.push(if norm > 0.0 { v / norm } else { v });
    }
    let m = DMatrix::from_columns(&rows);
    Ok((m.transpose() * m).determinant())
}
