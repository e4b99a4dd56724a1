use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::connection::{contract, TractorConnection};
use crate::error::{Error, Result};

/// Default refinement tolerance for transports.
pub const TRANSPORT_TOL: f64 = 1e-9;
/// Default cap on RK4 steps per smooth piece.
pub const MAX_STEPS: usize = 1 << 20;
const INITIAL_STEPS: usize = 8;

/// Piecewise-smooth curve in a chart, parametrized over `[0, 1]` per piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Path {
    Line { from: Vec<f64>, to: Vec<f64> },
    Polyline { points: Vec<Vec<f64>> },
    Bezier { control: Vec<Vec<f64>> },
}

impl Path {
    pub fn line(from: &[f64], to: &[f64]) -> Self {
        Path::Line { from: from.to_vec(), to: to.to_vec() }
    }

    /// Closed square loop at `x` in the coordinate plane `(a, b)`, traversed
    /// counterclockwise: `x -> x + eps e_a -> x + eps(e_a + e_b) -> x + eps e_b -> x`.
    pub fn square_loop(x: &[f64], a: usize, b: usize, eps: f64) -> Self {
        let mut p1 = x.to_vec();
        p1[a] += eps;
        let mut p2 = p1.clone();
        p2[b] += eps;
        let mut p3 = x.to_vec();
        p3[b] += eps;
        Path::Polyline { points: vec![x.to_vec(), p1, p2, p3, x.to_vec()] }
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        match self {
            Path::Line { from, to } => Path::Line { from: to.clone(), to: from.clone() },
            Path::Polyline { points } => Path::Polyline { points: points.iter().rev().cloned().collect() },
            Path::Bezier { control } => Path::Bezier { control: control.iter().rev().cloned().collect() },
        }
    }

    /// Smooth pieces: each is a Bezier control polygon (two points for a segment).
    fn pieces(&self) -> Vec<Vec<Vec<f64>>> {
        match self {
            Path::Line { from, to } => vec![vec![from.clone(), to.clone()]],
            Path::Polyline { points } => points.windows(2).map(|w| w.to_vec()).collect(),
            Path::Bezier { control } => vec![control.clone()],
        }
    }

    pub fn start(&self) -> Vec<f64> {
        self.pieces().first().map(|p| p[0].clone()).unwrap_or_default()
    }

    pub fn end(&self) -> Vec<f64> {
        self.pieces().last().map(|p| p[p.len() - 1].clone()).unwrap_or_default()
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let pieces = self.pieces();
        if pieces.is_empty() || pieces.iter().any(|p| p.len() < 2) {
            return Err(Error::InvalidDatum("path needs at least two points".into()));
        }
        if pieces.iter().flatten().any(|p| p.len() != dim) {
            return Err(Error::DimensionError(format!("path points must have {dim} coordinates")));
        }
        Ok(())
    }
}

/// De Casteljau point and derivative of a Bezier piece at `t`.
fn bezier(control: &[Vec<f64>], t: f64) -> (Vec<f64>, Vec<f64>) {
    let deg = control.len() - 1;
    let mut pts = control.to_vec();
    let mut vel = vec![0.0; control[0].len()];
    for level in (1..=deg).rev() {
        if level == 1 {
            for (i, v) in vel.iter_mut().enumerate() {
                *v = deg as f64 * (pts[1][i] - pts[0][i]);
            }
        }
        for k in 0..level {
            for i in 0..pts[k].len() {
                pts[k][i] = (1.0 - t) * pts[k][i] + t * pts[k + 1][i];
            }
        }
    }
    (pts.swap_remove(0), vel)
}

/// Transport matrix of one smooth piece with `n` RK4 steps.
fn rk4(conn: &TractorConnection, control: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    let m = conn.fiber_dim();
    let rhs = |t: f64, y: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let (x, v) = bezier(control, t);
        conn.chart.check_point(&x)?;
        let mats = conn.matrices(&x)?;
        Ok(-(contract(&mats, &v) * y))
    };
    let h = 1.0 / n as f64;
    let mut y = DMatrix::identity(m, m);
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + h / 2.0, &(&y + &k1 * (h / 2.0)))?;
        let k3 = rhs(t + h / 2.0, &(&y + &k2 * (h / 2.0)))?;
        let k4 = rhs(t + h, &(&y + &k3 * h))?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(y)
}

fn transport_piece(conn: &TractorConnection, control: &[Vec<f64>], tol: f64, max_steps: usize) -> Result<DMatrix<f64>> {
    let length: f64 = control
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .sum();
    if length == 0.0 {
        conn.chart.check_point(&control[0])?;
        return Ok(DMatrix::identity(conn.fiber_dim(), conn.fiber_dim()));
    }
    let mut n = INITIAL_STEPS;
    let mut coarse = rk4(conn, control, n)?;
    while 2 * n <= max_steps {
        n *= 2;
        let fine = rk4(conn, control, n)?;
        if (&fine - &coarse).amax() < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NoConvergence(format!("transport did not reach tolerance {tol:e} within {max_steps} steps")))
}

/// Fundamental matrix `T` of `v' = -A(γ') v` along the path: the transport of
/// `v0` is `T v0`. Each smooth piece is integrated by RK4 with step doubling
/// until successive refinements differ by less than `tol`.
pub fn transport_matrix(conn: &TractorConnection, path: &Path, tol: f64, max_steps: usize) -> Result<DMatrix<f64>> {
    path.validate(conn.dim())?;
    let m = conn.fiber_dim();
    let mut t = DMatrix::identity(m, m);
    for piece in path.pieces() {
        t = transport_piece(conn, &piece, tol, max_steps)? * t;
    }
    Ok(t)
}

pub fn parallel_transport(conn: &TractorConnection, path: &Path, v0: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    if v0.len() != conn.fiber_dim() {
        return Err(Error::DimensionError(format!("fiber vector must have length {}", conn.fiber_dim())));
    }
    Ok(transport_matrix(conn, path, tol, MAX_STEPS)? * v0)
}
