use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::geometry::local_geometry;
use super::ptype::{expected_labels, p_type, Label, Tolerances};
use super::{HomogeneousModel, ModelKind, ModelPoint, ReductionDatum};
use crate::error::{Error, Result};
use crate::forms::Form;
use crate::lie::{self, AlgebraBasis};
use crate::report::{Diagnostics, SampleRecord, StrataReport, StratumGeometry};

/// Point generators for orbit decompositions.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// Uniform on the unit sphere of representatives (of the null cone for
    /// conformal and CR models), then quotiented.
    Uniform,
    /// Direct construction of points of one label.
    Targeted(Label),
    /// `n` uniform samples plus `per_label` targeted samples for each
    /// expected measure-zero label.
    Stratified { per_label: usize },
}

/// Deterministic per-sample generator.
pub(crate) fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal_vec<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn unit_vec<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = normal_vec(rng, n);
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Uniform sample of `G/P` through unit representatives.
pub fn sample_uniform<R: Rng>(model: &HomogeneousModel, rng: &mut R) -> ModelPoint {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let v = match model.kind {
        ModelKind::Projective { n } => unit_vec(rng, n + 1),
        ModelKind::ComplexProjective { n } => unit_vec(rng, 2 * n + 2),
        ModelKind::Conformal { p, q } => {
            let a = unit_vec(rng, p + 1);
            let b = unit_vec(rng, q + 1);
            DVector::from_iterator(p + q + 2, a.iter().chain(b.iter()).map(|x| x * r))
        }
        ModelKind::Cr { p, q } => {
            let big_n = p + q + 2;
            let a = unit_vec(rng, 2 * (p + 1));
            let b = unit_vec(rng, 2 * (q + 1));
            let mut v = DVector::zeros(2 * big_n);
            for i in 0..p + 1 {
                v[i] = a[i] * r;
                v[big_n + i] = a[p + 1 + i] * r;
            }
            for i in 0..q + 1 {
                v[p + 1 + i] = b[i] * r;
                v[big_n + p + 1 + i] = b[q + 1 + i] * r;
            }
            v
        }
    };
    ModelPoint::new(v, model.quotient_mode()).expect("unit sample")
}

/// A random vector `w` in the span of the columns of `basis` with `S(w, w) = 0`,
/// avoiding the kernel of the restricted form.
fn null_in_span<R: Rng>(s: &DMatrix<f64>, basis: &DMatrix<f64>, rng: &mut R) -> Result<DVector<f64>> {
    let gram = basis.transpose() * s * basis;
    let eig = crate::linalg::symmetrize(&gram).symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let pick = |positive: bool, rng: &mut R| -> Option<DVector<f64>> {
        let idx: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| {
                let l = eig.eigenvalues[i];
                if positive {
                    l > 1e-9 * scale
                } else {
                    l < -1e-9 * scale
                }
            })
            .collect();
        if idx.is_empty() {
            return None;
        }
        let c = unit_vec(rng, idx.len());
        let mut w = DVector::zeros(gram.nrows());
        for (k, &i) in idx.iter().enumerate() {
            w += eig.eigenvectors.column(i) * (c[k] / eig.eigenvalues[i].abs().sqrt());
        }
        let q = (w.transpose() * &gram * &w)[(0, 0)].abs();
        Some(w / q.sqrt())
    };
    let (Some(a), Some(b)) = (pick(true, rng), pick(false, rng)) else {
        return Err(Error::ScenarioMismatch("restricted form is definite: no null vectors".into()));
    };
    Ok(basis * (a + b))
}

/// Constructs a point of the given label directly (measure-zero labels) or
/// by rejection from uniform samples (open labels).
pub fn sample_label_targets<R: Rng>(
    model: &HomogeneousModel,
    datum: &ReductionDatum,
    label: Label,
    tol: &Tolerances,
    rng: &mut R,
) -> Result<ModelPoint> {
    let mode = model.quotient_mode();
    match (label, datum) {
        (Label::IsolatedPlus, ReductionDatum::Vector(v)) => ModelPoint::new(v.clone(), mode),
        (Label::IsolatedMinus, ReductionDatum::Vector(v)) => ModelPoint::new(-v, mode),
        (Label::Zero, ReductionDatum::SymmetricForm(_) | ReductionDatum::HermitianForm(_)) => {
            let s = match datum {
                ReductionDatum::SymmetricForm(f) => f.real_matrix().clone(),
                ReductionDatum::HermitianForm(f) => f.real_matrix().clone(),
                _ => unreachable!(),
            };
            let id = DMatrix::identity(s.nrows(), s.nrows());
            ModelPoint::new(null_in_span(&s, &id, rng)?, mode)
        }
        (Label::Zero | Label::Hypersurface, ReductionDatum::Vector(v)) => {
            let f = model.form.as_ref().expect("vector data live on form models");
            let perp = f.orthocomplement(std::slice::from_ref(v))?;
            let basis = DMatrix::from_columns(&perp);
            let mut x = null_in_span(f.real_matrix(), &basis, rng)?;
            if label == Label::Hypersurface {
                let t: f64 = rng.sample(StandardNormal);
                x += v * t;
            }
            ModelPoint::new(x, mode)
        }
        _ => {
            for _ in 0..10_000 {
                let x = sample_uniform(model, rng);
                if p_type(model, datum, &x, tol)?.label == label {
                    return Ok(x);
                }
            }
            Err(Error::ScenarioMismatch(format!("no point of label {label} found by rejection")))
        }
    }
}

/// Random element `sum c_i e_i` with `c_i ~ N(0, scale^2 / dim)`.
pub fn random_algebra_element<R: Rng>(basis: &AlgebraBasis, scale: f64, rng: &mut R) -> DMatrix<f64> {
    if basis.dim() == 0 {
        return DMatrix::zeros(basis.size, basis.size);
    }
    let s = scale / (basis.dim() as f64).sqrt();
    let c: Vec<f64> = (0..basis.dim()).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
    basis.combine(&c)
}

/// `exp` of a random algebra element.
pub fn random_group_element<R: Rng>(basis: &AlgebraBasis, scale: f64, rng: &mut R) -> DMatrix<f64> {
    lie::expm(&random_algebra_element(basis, scale, rng))
}

/// Labels and diagnoses samples of `G/P`.
///
/// Open labels carry no local-geometry diagnostic; every other sample gets
/// the finite-difference gradient/Hessian of the defining function.
pub fn orbit_decompose_grid(
    model: &HomogeneousModel,
    datum: &ReductionDatum,
    sampler: &Sampler,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<StrataReport> {
    let expected = expected_labels(model, datum)?;
    let mut plan: Vec<Option<Label>> = match sampler {
        Sampler::Uniform => vec![None; n_samples],
        Sampler::Targeted(l) => vec![Some(*l); n_samples],
        Sampler::Stratified { per_label } => {
            let mut p = vec![None; n_samples];
            for l in expected.iter().filter(|l| !l.is_open()) {
                p.extend(std::iter::repeat_n(Some(*l), *per_label));
            }
            p
        }
    };
    plan.shrink_to_fit();
    let records: Vec<Result<(SampleRecord, Option<StratumGeometry>)>> = plan
        .par_iter()
        .enumerate()
        .map(|(i, target)| {
            let mut rng = sample_rng(seed, i as u64);
            let x = match target {
                None => sample_uniform(model, &mut rng),
                Some(l) => sample_label_targets(model, datum, *l, tol, &mut rng)?,
            };
            let label = p_type(model, datum, &x, tol)?.label;
            let (f, _) = super::ptype::pairing(model, datum, &x.representative);
            let mut diagnostics = Diagnostics { value: f[0], ..Default::default() };
            let mut geometry = None;
            if !label.is_open() && label != Label::Ambiguous {
                let g = local_geometry(model, datum, &x);
                diagnostics.grad_norm = Some(g.grad_norm);
                diagnostics.jacobian_rank = Some(g.jacobian_rank);
                diagnostics.hessian_det = g.hessian_det;
                geometry = Some(g.geometry);
            }
            Ok((
                SampleRecord {
                    index: i,
                    coords: x.representative.iter().copied().collect(),
                    label: label.as_str().to_string(),
                    zero_membership: vec![],
                    diagnostics,
                },
                geometry,
            ))
        })
        .collect();
    let mut samples = Vec::with_capacity(records.len());
    let mut geometry: BTreeMap<String, StratumGeometry> = BTreeMap::new();
    for r in records {
        let (rec, g) = r?;
        let entry = g.unwrap_or(StratumGeometry::Open);
        if rec.label != Label::Ambiguous.as_str() {
            geometry
                .entry(rec.label.clone())
                .and_modify(|e| {
                    if *e != entry {
                        *e = StratumGeometry::Unresolved
                    }
                })
                .or_insert(entry);
        }
        samples.push(rec);
    }
    let scenario = super::scenario_kind(model, datum)?.as_str();
    Ok(StrataReport::new(
        scenario,
        samples,
        expected.iter().map(|l| l.as_str().to_string()).collect(),
        geometry,
    ))
}
