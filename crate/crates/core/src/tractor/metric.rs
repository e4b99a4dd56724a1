use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar, MAX_DIM};
use crate::linalg;

/// `x^k` by repeated multiplication (safe for jets at `x = 0`).
fn ipow<S: Scalar>(x: S, k: u32) -> S {
    let mut out = S::cst(1.0);
    for _ in 0..k {
        out = out * x;
    }
    out
}

fn norm2<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::cst(0.0), |acc, v| acc + *v * *v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Scalar functions of the chart coordinates, used for conformal factors
/// and polynomial metric components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarField {
    Constant { value: f64 },
    Polynomial { terms: Vec<Monomial> },
    /// `amplitude * exp(-|x - center|^2 / width^2)`
    Gaussian { amplitude: f64, center: Vec<f64>, width: f64 },
    Sum { fields: Vec<ScalarField> },
}

impl ScalarField {
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            ScalarField::Constant { value } => S::cst(*value),
            ScalarField::Polynomial { terms } => terms.iter().fold(S::cst(0.0), |acc, m| {
                let mono = m
                    .powers
                    .iter()
                    .zip(x)
                    .fold(S::cst(1.0), |p, (k, xi)| p * ipow(*xi, *k));
                acc + mono * m.coeff
            }),
            ScalarField::Gaussian { amplitude, center, width } => {
                let d: Vec<S> = x.iter().zip(center).map(|(xi, c)| *xi + (-c)).collect();
                (norm2(&d) * (-1.0 / (width * width))).exp() * *amplitude
            }
            ScalarField::Sum { fields } => fields.iter().fold(S::cst(0.0), |acc, f| acc + f.eval(x)),
        }
    }

    /// Value, gradient and Hessian at `x`.
    pub fn jet(&self, x: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
        let n = x.len();
        let j = self.eval(&Jet::seed(x));
        (j.v, j.grad(n), DMatrix::from_fn(n, n, |a, b| j.h[a][b]))
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        match self {
            ScalarField::Constant { .. } => Ok(()),
            ScalarField::Polynomial { terms } => {
                if terms.iter().all(|m| m.powers.len() == n) {
                    Ok(())
                } else {
                    Err(Error::DimensionError(format!("polynomial term powers must have length {n}")))
                }
            }
            ScalarField::Gaussian { center, width, .. } => {
                if center.len() != n {
                    Err(Error::DimensionError(format!("gaussian center must have length {n}")))
                } else if *width <= 0.0 {
                    Err(Error::InvalidDatum("gaussian width must be positive".into()))
                } else {
                    Ok(())
                }
            }
            ScalarField::Sum { fields } => fields.iter().try_for_each(|f| f.check_dim(n)),
        }
    }
}

/// Closed-form metric ansatz on a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    /// `diag(1,...,1,-1,...,-1)` with `p` plus and `q` minus signs.
    Flat { signature: (usize, usize) },
    /// Unit round sphere in stereographic coordinates, `4/(1+|x|^2)^2 delta`.
    RoundSphere { dim: usize },
    /// Hyperbolic space in the ball model, `4/(1-|x|^2)^2 delta`.
    PoincareBall { dim: usize },
    /// `base + epsilon * exp(-|x-center|^2/width^2) * M` with `M` a
    /// unit-norm random symmetric matrix drawn from `seed`.
    BumpPerturbation {
        base: Box<MetricSpec>,
        epsilon: f64,
        center: Vec<f64>,
        width: f64,
        seed: u64,
    },
    /// Componentwise polynomial metric; `components` is the full `n x n`
    /// array (row-major) and must be symmetric.
    Polynomial { signature: (usize, usize), components: Vec<Vec<ScalarField>> },
    /// Conformal rescaling `exp(2 f) g`.
    Rescaled { base: Box<MetricSpec>, log_factor: ScalarField },
}

impl MetricSpec {
    pub fn flat(p: usize, q: usize) -> Self {
        MetricSpec::Flat { signature: (p, q) }
    }

    pub fn round_sphere(dim: usize) -> Self {
        MetricSpec::RoundSphere { dim }
    }

    pub fn poincare_ball(dim: usize) -> Self {
        MetricSpec::PoincareBall { dim }
    }

    pub fn bump(base: MetricSpec, epsilon: f64, center: Vec<f64>, width: f64, seed: u64) -> Self {
        MetricSpec::BumpPerturbation { base: Box::new(base), epsilon, center, width, seed }
    }

    pub fn rescaled(base: MetricSpec, log_factor: ScalarField) -> Self {
        MetricSpec::Rescaled { base: Box::new(base), log_factor }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Flat { signature } | MetricSpec::Polynomial { signature, .. } => signature.0 + signature.1,
            MetricSpec::RoundSphere { dim } | MetricSpec::PoincareBall { dim } => *dim,
            MetricSpec::BumpPerturbation { base, .. } | MetricSpec::Rescaled { base, .. } => base.dim(),
        }
    }

    pub fn signature(&self) -> (usize, usize) {
        match self {
            MetricSpec::Flat { signature } | MetricSpec::Polynomial { signature, .. } => *signature,
            MetricSpec::RoundSphere { dim } | MetricSpec::PoincareBall { dim } => (*dim, 0),
            MetricSpec::BumpPerturbation { base, .. } | MetricSpec::Rescaled { base, .. } => base.signature(),
        }
    }

    /// Default chart box: the whole stereographic chart is usable for the
    /// sphere; the ball chart keeps its corners inside `|x| < 0.9`.
    pub fn default_domain(&self) -> Vec<(f64, f64)> {
        let n = self.dim();
        match self {
            MetricSpec::PoincareBall { .. } => {
                let r = 0.9 / (n as f64).sqrt();
                vec![(-r, r); n]
            }
            MetricSpec::BumpPerturbation { base, .. } | MetricSpec::Rescaled { base, .. } => base.default_domain(),
            _ => vec![(-10.0, 10.0); n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionError(format!("chart dimension must be in 1..={MAX_DIM}, got {n}")));
        }
        match self {
            MetricSpec::BumpPerturbation { base, center, width, epsilon, .. } => {
                base.validate()?;
                if center.len() != n {
                    return Err(Error::DimensionError(format!("bump center must have length {n}")));
                }
                if *width <= 0.0 || !epsilon.is_finite() {
                    return Err(Error::InvalidDatum("bump width must be positive and epsilon finite".into()));
                }
                Ok(())
            }
            MetricSpec::Polynomial { components, .. } => {
                if components.len() != n || components.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionError(format!("metric components must be {n} x {n}")));
                }
                for (a, row) in components.iter().enumerate() {
                    for (b, f) in row.iter().enumerate() {
                        f.check_dim(n)?;
                        if components[b][a] != *f {
                            return Err(Error::InvalidForm(format!("component ({a},{b}) differs from ({b},{a})")));
                        }
                    }
                }
                Ok(())
            }
            MetricSpec::Rescaled { base, log_factor } => {
                base.validate()?;
                log_factor.check_dim(n)
            }
            _ => Ok(()),
        }
    }

    /// Metric components, row-major `n x n`.
    pub fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let diag = |f: S| {
            let mut g = vec![S::cst(0.0); n * n];
            for i in 0..n {
                g[i * n + i] = f;
            }
            g
        };
        match self {
            MetricSpec::Flat { signature } => {
                let mut g = vec![S::cst(0.0); n * n];
                for i in 0..n {
                    g[i * n + i] = S::cst(if i < signature.0 { 1.0 } else { -1.0 });
                }
                g
            }
            MetricSpec::RoundSphere { .. } => {
                let d = norm2(x) + 1.0;
                diag((d * d).recip() * 4.0)
            }
            MetricSpec::PoincareBall { .. } => {
                let d = -norm2(x) + 1.0;
                diag((d * d).recip() * 4.0)
            }
            MetricSpec::BumpPerturbation { base, epsilon, center, width, seed } => {
                let m = bump_direction(n, *seed);
                let d: Vec<S> = x.iter().zip(center).map(|(xi, c)| *xi + (-c)).collect();
                let bump = (norm2(&d) * (-1.0 / (width * width))).exp() * *epsilon;
                let mut g = base.components(x);
                for i in 0..n {
                    for j in 0..n {
                        g[i * n + j] = g[i * n + j] + bump * m[(i, j)];
                    }
                }
                g
            }
            MetricSpec::Polynomial { components, .. } => components.iter().flatten().map(|f| f.eval(x)).collect(),
            MetricSpec::Rescaled { base, log_factor } => {
                let w = (log_factor.eval(x) * 2.0).exp();
                base.components(x).into_iter().map(|c| c * w).collect()
            }
        }
    }
}

/// Unit-Frobenius-norm random symmetric matrix for the bump perturbation.
fn bump_direction(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.sample(StandardNormal);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let norm = m.norm();
    m / norm
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DerivativeEngine {
    /// Second-order forward-mode jets.
    #[default]
    Autodiff,
    /// Richardson-extrapolated central differences with base step `step`.
    CentralDifference { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Conformal,
    /// Projective class of the Levi-Civita connection of the chart metric.
    Projective,
}

/// Metric value with its first and second coordinate derivatives.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `dg[k][(a, b)] = d_k g_ab`
    pub dg: Vec<DMatrix<f64>>,
    /// `ddg[k][l][(a, b)] = d_k d_l g_ab`
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

/// Largest condition number accepted for `g(x)`.
pub const MAX_CONDITION: f64 = 1e8;

/// A metric ansatz on an open coordinate box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartGeometry {
    pub metric: MetricSpec,
    pub domain: Vec<(f64, f64)>,
    pub engine: DerivativeEngine,
    pub structure: StructureKind,
}

impl ChartGeometry {
    pub fn new(metric: MetricSpec, structure: StructureKind) -> Result<Self> {
        metric.validate()?;
        let domain = metric.default_domain();
        Ok(ChartGeometry { metric, domain, engine: DerivativeEngine::Autodiff, structure })
    }

    pub fn with_engine(mut self, engine: DerivativeEngine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.dim() || domain.iter().any(|(a, b)| !(a < b)) {
            return Err(Error::DimensionError("domain must be one nonempty interval per coordinate".into()));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn signature(&self) -> (usize, usize) {
        self.metric.signature()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.domain).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::DomainError(x.to_vec()))
        }
    }

    /// Metric value at `x`, checked for declared signature and conditioning.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let n = self.dim();
        let g = DMatrix::from_row_slice(n, n, &self.metric.components(x));
        self.check_metric(x, &g)?;
        Ok(g)
    }

    fn check_metric(&self, x: &[f64], g: &DMatrix<f64>) -> Result<()> {
        let degenerate = |reason: String| Error::DegenerateMetric { at: x.to_vec(), reason };
        if g.iter().any(|v| !v.is_finite()) {
            return Err(degenerate("non-finite metric component".into()));
        }
        let ev = linalg::symmetric_eigenvalues(g);
        let max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let min = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if min == 0.0 || max / min > MAX_CONDITION {
            return Err(degenerate(format!("condition number {:.3e}", max / min)));
        }
        let p = ev.iter().filter(|v| **v > 0.0).count();
        if (p, ev.len() - p) != self.signature() {
            return Err(degenerate(format!("signature ({}, {}) differs from declared {:?}", p, ev.len() - p, self.signature())));
        }
        Ok(())
    }

    /// `g`, `dg`, `ddg` at `x` with the configured engine.
    pub fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        let g = self.metric_at(x)?;
        let n = self.dim();
        let (dg, ddg) = match self.engine {
            DerivativeEngine::Autodiff => {
                let jet = MetricJet::from_jets(n, &self.metric.components(&Jet::seed(x)))?;
                return Ok(jet);
            }
            DerivativeEngine::CentralDifference { step } => self.central_differences(x, step),
        };
        let g_inv = crate::lie::checked_inverse(&g)?;
        Ok(MetricJet { g, g_inv, dg, ddg })
    }

    fn central_differences(&self, x: &[f64], h: f64) -> (Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>) {
        let n = self.dim();
        let at = |shift: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for (i, d) in shift {
                y[*i] += d;
            }
            DMatrix::from_row_slice(n, n, &self.metric.components(&y))
        };
        let first = |k: usize, h: f64| (at(&[(k, h)]) - at(&[(k, -h)])) / (2.0 * h);
        let second = |k: usize, l: usize, h: f64| {
            if k == l {
                (at(&[(k, h)]) - at(&[]) * 2.0 + at(&[(k, -h)])) / (h * h)
            } else {
                (at(&[(k, h), (l, h)]) - at(&[(k, h), (l, -h)]) - at(&[(k, -h), (l, h)]) + at(&[(k, -h), (l, -h)]))
                    / (4.0 * h * h)
            }
        };
        let dg = (0..n).map(|k| (first(k, h / 2.0) * 4.0 - first(k, h)) / 3.0).collect();
        let ddg = (0..n)
            .map(|k| (0..n).map(|l| (second(k, l, h / 2.0) * 4.0 - second(k, l, h)) / 3.0).collect())
            .collect();
        (dg, ddg)
    }
}
