use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::connection::{contract, TractorConnection};
use super::metric::StructureKind;
use super::transport::{transport_matrix, Path, MAX_STEPS, TRANSPORT_TOL};
use crate::error::{Error, Result};
use crate::lie::{self, commutator, AlgebraBasis};
use crate::linalg;

/// Base step for differentiating connection matrices.
const FD_STEP: f64 = 1e-3;

fn shifted(x: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(dir).map(|(a, d)| a + t * d).collect()
}

/// Richardson-extrapolated central derivative of `A(η)` along `ξ`.
fn directional_derivative(conn: &TractorConnection, x: &[f64], xi: &[f64], eta: &[f64]) -> Result<DMatrix<f64>> {
    let central = |h: f64| -> Result<DMatrix<f64>> {
        let p = conn.form(&shifted(x, xi, h), eta)?;
        let m = conn.form(&shifted(x, xi, -h), eta)?;
        Ok((p - m) / (2.0 * h))
    };
    Ok((central(FD_STEP / 2.0)? * 4.0 - central(FD_STEP)?) / 3.0)
}

/// Tractor curvature `κ(ξ, η) = ∂_ξ A(η) - ∂_η A(ξ) + [A(ξ), A(η)]`, the
/// endomorphism `[∇_ξ, ∇_η]` for constant coefficient fields.
pub fn tractor_curvature(conn: &TractorConnection, x: &[f64], xi: &[f64], eta: &[f64]) -> Result<DMatrix<f64>> {
    let n = conn.dim();
    if xi.len() != n || eta.len() != n {
        return Err(Error::DimensionError(format!("tangent vectors must have {n} components")));
    }
    let mats = conn.matrices(x)?;
    let (a_xi, a_eta) = (contract(&mats, xi), contract(&mats, eta));
    let d1 = directional_derivative(conn, x, xi, eta)?;
    let d2 = directional_derivative(conn, x, eta, xi)?;
    Ok(d1 - d2 + commutator(&a_xi, &a_eta))
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Block of `κ` mapping `T^1` and the middle slots further up the
/// filtration; it carries the torsion of the underlying connection.
fn torsion_block(conn: &TractorConnection, k: &DMatrix<f64>) -> f64 {
    let n = conn.dim();
    match conn.kind() {
        StructureKind::Conformal => {
            let a = k.view((1, n + 1), (n, 1)).amax();
            let b = k.view((0, 1), (1, n)).amax();
            a.max(b)
        }
        StructureKind::Projective => k.view((0, n), (n, 1)).amax(),
    }
}

/// Largest torsion-slot entry of `κ(e_a, e_b)` at `x` over coordinate pairs.
pub fn torsion_residual(conn: &TractorConnection, x: &[f64]) -> Result<f64> {
    let n = conn.dim();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            let k = tractor_curvature(conn, x, &unit(n, a), &unit(n, b))?;
            worst = worst.max(torsion_block(conn, &k));
        }
    }
    Ok(worst)
}

/// Ricci-type trace `tr(W -> κ_0(W, Y) Z)` of the tangent block of the
/// curvature, maximized over the sampled `(Y, Z)` pairs.
pub fn normality_residual(conn: &TractorConnection, x: &[f64], directions: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let n = conn.dim();
    let curv: Vec<Vec<DMatrix<f64>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|c| tractor_curvature(conn, x, &unit(n, a), &unit(n, c)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (y, z) in directions {
        if y.len() != n || z.len() != n {
            return Err(Error::DimensionError(format!("directions must have {n} components")));
        }
        let mut trace = 0.0;
        for a in 0..n {
            let k = curv[a].iter().zip(y).fold(DMatrix::zeros(conn.fiber_dim(), conn.fiber_dim()), |acc, (m, v)| acc + m * *v);
            for b in 0..n {
                // conformal middle slots are covectors: the action on vectors is minus the transpose
                trace += match conn.kind() {
                    StructureKind::Conformal => -k[(1 + b, 1 + a)] * z[b],
                    StructureKind::Projective => k[(a, b)] * z[b],
                };
            }
        }
        worst = worst.max(trace.abs());
    }
    Ok(worst)
}

/// Seeded `(Y, Z)` pairs of unit directions.
pub fn sample_directions(n: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit_vec = || {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let v = &v / v.norm();
        v.iter().copied().collect::<Vec<f64>>()
    };
    (0..count).map(|_| (unit_vec(), unit_vec())).collect()
}

/// Sample points around a basepoint; each contributes radially transported
/// curvature and a small lasso loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopFamily {
    pub points: Vec<Vec<f64>>,
    /// Edge length of the square loops.
    pub loop_size: f64,
}

impl LoopFamily {
    /// `count` points uniform in the box of half-width `radius` around
    /// `basepoint`, clipped to the chart domain.
    pub fn seeded(conn: &TractorConnection, basepoint: &[f64], count: usize, radius: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dom = &conn.chart.domain;
        let margin = 4.0 * FD_STEP;
        let points = (0..count)
            .map(|_| {
                basepoint
                    .iter()
                    .zip(dom)
                    .map(|(b, (lo, hi))| {
                        let v = b + radius * (2.0 * rng.random::<f64>() - 1.0);
                        v.clamp(lo + margin, hi - margin)
                    })
                    .collect()
            })
            .collect();
        LoopFamily { points, loop_size: 1e-2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HolonomySample {
    #[serde(rename = "loop")]
    pub loop_path: Path,
    pub transport: Vec<Vec<f64>>,
    /// Principal logarithm of the transport.
    pub log: Vec<Vec<f64>>,
    pub metric_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HolonomyResult {
    pub basis: AlgebraBasis,
    pub samples: Vec<HolonomySample>,
    /// Largest `‖log T‖` over the loops.
    pub max_log_norm: f64,
    /// Largest norm of a transported curvature endomorphism.
    pub max_curvature_norm: f64,
    pub closure_residual: f64,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

struct Contribution {
    curvatures: Vec<DMatrix<f64>>,
    loops: Vec<(HolonomySample, DMatrix<f64>)>,
}

fn contributions(conn: &TractorConnection, basepoint: &[f64], x: &[f64], eps: f64, h0: &Option<DMatrix<f64>>) -> Result<Contribution> {
    let n = conn.dim();
    let radial = Path::line(basepoint, x);
    let t = transport_matrix(conn, &radial, TRANSPORT_TOL, MAX_STEPS)?;
    let t_inv = lie::checked_inverse(&t)?;
    let mut curvatures = Vec::new();
    let mut loops = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let k = tractor_curvature(conn, x, &unit(n, a), &unit(n, b))?;
            curvatures.push(&t_inv * k * &t);
            // lasso: out along the radius, around the square, back
            let square = Path::square_loop(x, a, b, eps);
            let hol = &t_inv * transport_matrix(conn, &square, TRANSPORT_TOL * eps * eps, MAX_STEPS)? * &t;
            let id = DMatrix::identity(hol.nrows(), hol.ncols());
            if (&hol - &id).norm() >= 0.5 {
                continue;
            }
            let log = lie::logm(&hol)?;
            let metric_residual = h0.as_ref().map(|h| (hol.transpose() * h * &hol - h).amax());
            let mut pts = vec![basepoint.to_vec()];
            if let Path::Polyline { points } = &square {
                pts.extend(points.iter().cloned());
            }
            pts.push(basepoint.to_vec());
            let sample = HolonomySample {
                loop_path: Path::Polyline { points: pts },
                transport: rows(&hol),
                log: rows(&log),
                metric_residual,
            };
            loops.push((sample, log / (eps * eps)));
        }
    }
    Ok(Contribution { curvatures, loops })
}

/// Holonomy algebra at `basepoint` from two spanning families: curvature
/// endomorphisms transported back along radial paths, and logarithms of
/// lasso-loop transports. Candidates below `threshold` in norm (after
/// projection onto the current span) are discarded; accumulation stops once
/// `budget` consecutive candidates leave the dimension unchanged, and the
/// span is then closed under brackets.
pub fn holonomy_algebra(
    conn: &TractorConnection,
    basepoint: &[f64],
    family: &LoopFamily,
    budget: usize,
    threshold: f64,
) -> Result<HolonomyResult> {
    let tag = conn.structure_algebra(basepoint)?;
    let size = conn.fiber_dim();
    let h0 = conn.tractor_metric(basepoint)?;
    let ambient = tag.basis();
    let max_dim = ambient.dim();
    let parts: Vec<Contribution> = family
        .points
        .par_iter()
        .map(|x| contributions(conn, basepoint, x, family.loop_size, &h0))
        .collect::<Result<_>>()?;

    let mut span: Vec<DVector<f64>> = Vec::new();
    let mut samples = Vec::new();
    let mut max_log_norm = 0.0f64;
    let mut max_curvature_norm = 0.0f64;
    let mut stable = 0usize;
    let try_add = |m: &DMatrix<f64>, span: &mut Vec<DVector<f64>>| -> bool {
        // holonomy lies in the structure algebra; drop the numerical off-algebra part
        let mut v = linalg::flatten(&ambient.project(m));
        let norm = v.norm();
        for e in span.iter() {
            v -= e * e.dot(&v);
        }
        let r = v.norm();
        if r > threshold && r > 1e-6 * norm {
            span.push(v / r);
            true
        } else {
            false
        }
    };
    'outer: for part in parts {
        let mut candidates = part.curvatures;
        for (sample, scaled_log) in part.loops {
            max_log_norm = max_log_norm.max(DMatrix::from_row_iterator(size, size, sample.log.iter().flatten().copied()).norm());
            samples.push(sample);
            candidates.push(scaled_log);
        }
        for c in candidates {
            max_curvature_norm = max_curvature_norm.max(c.norm());
            if try_add(&c, &mut span) {
                stable = 0;
            } else {
                stable += 1;
            }
            if span.len() == max_dim || stable >= budget {
                break 'outer;
            }
        }
    }
    if span.len() < max_dim && stable < budget {
        return Err(Error::NoConvergence(format!(
            "holonomy span still growing after {} points (dimension {})",
            family.points.len(),
            span.len()
        )));
    }
    // bracket closure
    loop {
        let mats: Vec<DMatrix<f64>> = span.iter().map(|v| linalg::unflatten(v, size, size)).collect();
        let mut grew = false;
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                grew |= try_add(&commutator(&mats[i], &mats[j]), &mut span);
            }
        }
        if !grew {
            break;
        }
    }
    let mats: Vec<DMatrix<f64>> = span.iter().map(|v| linalg::unflatten(v, size, size)).collect();
    let basis = AlgebraBasis::from_spanning(&mats, size, tag);
    let closure_residual = basis.closure_residual();
    Ok(HolonomyResult { basis, samples, max_log_norm, max_curvature_norm, closure_residual })
}
