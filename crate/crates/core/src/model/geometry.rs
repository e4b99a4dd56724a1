use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ptype::pairing;
use super::{HomogeneousModel, ModelPoint, ReductionDatum};
use crate::lie;
use crate::linalg;
use crate::report::StratumGeometry;

/// Threshold on gradient and Hessian determinant for stratum geometry.
pub const GEOMETRY_TOL: f64 = 1e-6;
const GRAD_STEP: f64 = 1e-5;
const HESS_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalGeometry {
    pub values: Vec<f64>,
    /// Largest singular value of the constraint Jacobian.
    pub grad_norm: f64,
    pub jacobian_rank: usize,
    pub hessian_det: Option<f64>,
    pub geometry: StratumGeometry,
}

/// Orthonormal directions spanning a complement of `p_x` in `g`; their
/// infinitesimal actions on `x` span the tangent space of `G/P` at `x`.
pub(crate) fn tangent_directions(model: &HomogeneousModel, x: &ModelPoint) -> Vec<DMatrix<f64>> {
    let px = model.parabolic_at(x);
    let projected: Vec<DVector<f64>> = model
        .algebra
        .elements
        .iter()
        .map(|e| linalg::flatten(&(e - px.project(e))))
        .collect();
    let span = linalg::column_span(&DMatrix::from_columns(&projected), 1e-8);
    let n = model.ambient_dim();
    span.column_iter()
        .map(|c| linalg::unflatten(&c.into_owned(), n, n))
        .collect()
}

/// Defining constraints at `exp(Y) x`, on the unit representative.
fn constraints(model: &HomogeneousModel, datum: &ReductionDatum, x: &DVector<f64>, y: &DMatrix<f64>) -> Vec<f64> {
    let moved = lie::expm(y) * x;
    let unit = &moved / moved.norm();
    pairing(model, datum, &unit).0
}

/// Finite-difference gradient, Jacobian rank and (where the gradient
/// vanishes) Hessian determinant of the scenario's defining function on
/// `G/P` at `x`.
pub fn local_geometry(model: &HomogeneousModel, datum: &ReductionDatum, x: &ModelPoint) -> LocalGeometry {
    let xv = &x.representative;
    let dirs = tangent_directions(model, x);
    let values = pairing(model, datum, xv).0;
    let k = values.len();
    let mut jac = DMatrix::zeros(k, dirs.len());
    for (i, y) in dirs.iter().enumerate() {
        let fp = constraints(model, datum, xv, &(y * GRAD_STEP));
        let fm = constraints(model, datum, xv, &(y * -GRAD_STEP));
        for c in 0..k {
            jac[(c, i)] = (fp[c] - fm[c]) / (2.0 * GRAD_STEP);
        }
    }
    let sv = jac.clone().svd(false, false).singular_values;
    let grad_norm = sv.iter().cloned().fold(0.0, f64::max);
    let jacobian_rank = sv.iter().filter(|s| **s > GEOMETRY_TOL).count();
    let mut hessian_det = None;
    let geometry = if grad_norm > 10.0 * GEOMETRY_TOL {
        if jacobian_rank >= 2 {
            StratumGeometry::Codimension2
        } else {
            StratumGeometry::Hypersurface
        }
    } else if grad_norm <= GEOMETRY_TOL {
        let h = hessian(model, datum, xv, &dirs);
        let det = h.determinant();
        hessian_det = Some(det);
        if det.abs() > GEOMETRY_TOL {
            StratumGeometry::Isolated
        } else {
            StratumGeometry::Unresolved
        }
    } else {
        StratumGeometry::Unresolved
    };
    LocalGeometry { values, grad_norm, jacobian_rank, hessian_det, geometry }
}

/// Hessian of the first constraint along the tangent directions.
fn hessian(model: &HomogeneousModel, datum: &ReductionDatum, x: &DVector<f64>, dirs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = dirs.len();
    let h = HESS_STEP;
    let f = |a: f64, i: usize, b: f64, j: usize| {
        let y = &dirs[i] * a + &dirs[j] * b;
        constraints(model, datum, x, &y)[0]
    };
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (f(h, i, h, j) - f(h, i, -h, j) - f(-h, i, h, j) + f(-h, i, -h, j)) / (4.0 * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
