//! Homogeneous models `G/P`, holonomy-reduction data on them, and the
//! P-type classification of points.
//!
//! Every model works in *standard* ambient coordinates, where the ambient
//! form (if any) is `diag(+1 x (p+1), -1 x (q+1))`. The parabolic `P` is the
//! stabilizer of the basepoint `o = C e_0`, where `C` maps the adapted null
//! frame (form `[[0,0,1],[0,I_{p,q},0],[1,0,0]]`) to standard coordinates.

mod datum;
mod geometry;
mod ptype;
mod sampling;

pub use datum::{DatumJson, ReductionDatum};
pub use geometry::{local_geometry, LocalGeometry, GEOMETRY_TOL};
pub use ptype::{
    expected_labels, orbit_dimension, p_type, scenario_kind, Label, PTypeLabel, ScenarioKind,
    Tolerances,
};
pub use sampling::{
    orbit_decompose_grid, random_algebra_element, random_group_element, sample_label_targets,
    sample_uniform, Sampler,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{AnyForm, Form, HermitianForm, SymmetricForm};
use crate::lie::{
    self, special_linear, special_linear_complex, special_unitary, AlgebraBasis, AlgebraElement,
    AlgebraTag, GroupElement, Representation,
};
use crate::linalg::{self, complex_to_real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum ModelKind {
    /// Oriented projective sphere `S^n` of rays in `R^{n+1}`, `G = SL(n+1, R)`.
    Projective { n: usize },
    /// Isotropic rays in `R^{p+1,q+1}`, `G = SO(p+1, q+1)`.
    Conformal { p: usize, q: usize },
    /// `CP^n`, `G = SL(n+1, C)` as a real group.
    ComplexProjective { n: usize },
    /// Isotropic complex lines in `C^{p+1,q+1}`, `G = SU(p+1, q+1)`.
    Cr { p: usize, q: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuotientMode {
    Ray,
    ComplexLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub representative: DVector<f64>,
    pub mode: QuotientMode,
}

impl ModelPoint {
    /// Normalizes the representative to unit Euclidean norm.
    pub fn new(v: DVector<f64>, mode: QuotientMode) -> Result<Self> {
        let n = v.norm();
        if !(n > 1e-12) || !n.is_finite() {
            return Err(Error::InvalidPoint("zero or non-finite representative".into()));
        }
        Ok(ModelPoint { representative: v / n, mode })
    }
}

#[derive(Debug, Clone)]
pub struct HomogeneousModel {
    pub kind: ModelKind,
    /// Ambient form in standard coordinates.
    pub form: Option<AnyForm>,
    /// Adapted frame to standard coordinates.
    pub frame: DMatrix<f64>,
    frame_inv: DMatrix<f64>,
    pub algebra: AlgebraBasis,
    /// Stabilizer algebra of the basepoint.
    pub parabolic: AlgebraBasis,
    /// Complement to `parabolic` given by the block-lower part of the adapted presentation.
    pub g_minus: AlgebraBasis,
    pub basepoint: DVector<f64>,
}

/// Adapted null frame for signature `(p+1, q+1)`:
/// `e_0 -> (s_0 + s_last)/sqrt 2`, `e_last -> (s_0 - s_last)/sqrt 2`.
fn null_frame(p: usize, q: usize) -> DMatrix<f64> {
    let m = p + q + 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut c = DMatrix::zeros(m, m);
    c[(0, 0)] = r;
    c[(m - 1, 0)] = r;
    c[(0, m - 1)] = r;
    c[(m - 1, m - 1)] = -r;
    // Adapted middle slots: p positive, then q negative; standard coordinates
    // list the positives 1..=p and the negatives p+1..p+q before the last slot.
    for i in 1..m - 1 {
        c[(i, i)] = 1.0;
    }
    c
}

impl HomogeneousModel {
    pub fn new(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::Projective { n } | ModelKind::ComplexProjective { n } if n == 0 => {
                Err(Error::DimensionError("model dimension must be positive".into()))
            }
            ModelKind::Conformal { p, q } | ModelKind::Cr { p, q } if p + q == 0 => {
                Err(Error::DimensionError("model dimension must be positive".into()))
            }
            _ => Ok(Self::build(kind)),
        }
    }

    pub fn projective(n: usize) -> Result<Self> {
        Self::new(ModelKind::Projective { n })
    }

    pub fn conformal(p: usize, q: usize) -> Result<Self> {
        Self::new(ModelKind::Conformal { p, q })
    }

    pub fn complex_projective(n: usize) -> Result<Self> {
        Self::new(ModelKind::ComplexProjective { n })
    }

    pub fn cr(p: usize, q: usize) -> Result<Self> {
        Self::new(ModelKind::Cr { p, q })
    }

    fn build(kind: ModelKind) -> Self {
        let (form, frame, algebra) = match kind {
            ModelKind::Projective { n } => (None, DMatrix::identity(n + 1, n + 1), special_linear(n + 1)),
            ModelKind::ComplexProjective { n } => {
                (None, DMatrix::identity(2 * n + 2, 2 * n + 2), special_linear_complex(n + 1))
            }
            ModelKind::Conformal { p, q } => {
                let s = SymmetricForm::standard(p + 1, q + 1);
                let alg = lie::orthogonal(&s);
                (Some(AnyForm::Symmetric(s)), null_frame(p, q), alg)
            }
            ModelKind::Cr { p, q } => {
                let h = HermitianForm::standard(p + 1, q + 1);
                let alg = special_unitary(&h);
                let c = null_frame(p, q);
                let z = DMatrix::zeros(c.nrows(), c.ncols());
                (Some(AnyForm::Hermitian(h)), complex_to_real(&c, &z), alg)
            }
        };
        let frame_inv = frame.clone().try_inverse().expect("frame is invertible");
        let size = frame.nrows();
        let basepoint = frame.column(0).into_owned();
        let rep = match kind {
            ModelKind::Projective { .. } | ModelKind::Conformal { .. } => Representation::Ray,
            _ => Representation::ComplexLine,
        };
        let parabolic = lie::stabilizer_of(&algebra, &rep, &basepoint);
        let mut model = HomogeneousModel {
            kind,
            form,
            frame,
            frame_inv,
            parabolic,
            g_minus: AlgebraBasis::empty(size, algebra.tag.clone()),
            algebra,
            basepoint,
        };
        let d = model.dim();
        let gens: Vec<DMatrix<f64>> = (0..d)
            .map(|i| {
                let mut x = vec![0.0; d];
                x[i] = 1.0;
                model.chart_generator(&x)
            })
            .collect();
        model.g_minus = AlgebraBasis::from_spanning(&gens, size, model.algebra.tag.clone());
        model
    }

    pub fn tag(&self) -> &AlgebraTag {
        &self.algebra.tag
    }

    /// Real dimension of the ambient representation.
    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    /// Real dimension of `G/P`.
    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::Projective { n } => n,
            ModelKind::Conformal { p, q } => p + q,
            ModelKind::ComplexProjective { n } => 2 * n,
            ModelKind::Cr { p, q } => 2 * (p + q) + 1,
        }
    }

    pub fn quotient_mode(&self) -> QuotientMode {
        match self.kind {
            ModelKind::Projective { .. } | ModelKind::Conformal { .. } => QuotientMode::Ray,
            _ => QuotientMode::ComplexLine,
        }
    }

    pub fn point_representation(&self) -> Representation {
        match self.quotient_mode() {
            QuotientMode::Ray => Representation::Ray,
            QuotientMode::ComplexLine => Representation::ComplexLine,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.kind, ModelKind::ComplexProjective { .. } | ModelKind::Cr { .. })
    }

    /// Number of complex coordinates for complex models.
    fn complex_size(&self) -> usize {
        self.ambient_dim() / 2
    }

    /// Element of the block-lower complement with chart coordinates `x`, in
    /// standard coordinates.
    ///
    /// Conformal: `x in R^{p,q}` sits in column 0 and `-x^T I_{p,q}` in the
    /// last row. CR: `x = (Re z, Im z, t)` with `z` in column 0, `-z^* I_{p,q}`
    /// in the last row and `i t` in the corner.
    pub fn chart_generator(&self, x: &[f64]) -> DMatrix<f64> {
        assert_eq!(x.len(), self.dim(), "chart coordinate count");
        let adapted = match self.kind {
            ModelKind::Projective { n } => {
                let mut m = DMatrix::zeros(n + 1, n + 1);
                for i in 0..n {
                    m[(i + 1, 0)] = x[i];
                }
                m
            }
            ModelKind::Conformal { p, q } => {
                let n = p + q;
                let mut m = DMatrix::zeros(n + 2, n + 2);
                for i in 0..n {
                    let sign = if i < p { 1.0 } else { -1.0 };
                    m[(i + 1, 0)] = x[i];
                    m[(n + 1, i + 1)] = -sign * x[i];
                }
                m
            }
            ModelKind::ComplexProjective { n } => {
                let mut re = DMatrix::zeros(n + 1, n + 1);
                let mut im = DMatrix::zeros(n + 1, n + 1);
                for i in 0..n {
                    re[(i + 1, 0)] = x[i];
                    im[(i + 1, 0)] = x[n + i];
                }
                complex_to_real(&re, &im)
            }
            ModelKind::Cr { p, q } => {
                let n = p + q;
                let mut re = DMatrix::zeros(n + 2, n + 2);
                let mut im = DMatrix::zeros(n + 2, n + 2);
                for i in 0..n {
                    let sign = if i < p { 1.0 } else { -1.0 };
                    re[(i + 1, 0)] = x[i];
                    im[(i + 1, 0)] = x[n + i];
                    // -(z^*) I: conjugate flips the imaginary part
                    re[(n + 1, i + 1)] = -sign * x[i];
                    im[(n + 1, i + 1)] = sign * x[n + i];
                }
                im[(n + 1, 0)] = x[2 * n];
                complex_to_real(&re, &im)
            }
        };
        &self.frame * adapted * &self.frame_inv
    }

    /// Representative of the chart point `exp(X(x)) o`.
    pub fn chart_point(&self, x: &[f64]) -> DVector<f64> {
        lie::expm(&self.chart_generator(x)) * &self.basepoint
    }

    /// Coordinates of a standard-frame vector in the adapted frame.
    pub fn to_adapted(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.frame_inv * v
    }

    pub fn from_adapted(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.frame * v
    }

    /// Checks dimension and, for models of null objects, isotropy.
    pub fn validate_point(&self, x: &ModelPoint, zero_tol: f64) -> Result<()> {
        if x.representative.len() != self.ambient_dim() {
            return Err(Error::InvalidPoint(format!(
                "representative of length {} for ambient dimension {}",
                x.representative.len(),
                self.ambient_dim()
            )));
        }
        if x.mode != self.quotient_mode() {
            return Err(Error::InvalidPoint(format!("{:?} point on a {:?} model", x.mode, self.quotient_mode())));
        }
        if let Some(f) = &self.form {
            let v = &x.representative;
            let q = f.eval(v, v);
            if q.abs() > zero_tol * f.spectral_scale() * v.norm_squared() {
                return Err(Error::InvalidPoint(format!("representative not isotropic (h(x,x) = {q:.3e})")));
            }
        }
        Ok(())
    }

    pub fn point(&self, v: DVector<f64>) -> Result<ModelPoint> {
        let p = ModelPoint::new(v, self.quotient_mode())?;
        self.validate_point(&p, 1e-9)?;
        Ok(p)
    }

    /// Stabilizer algebra of the point `x`.
    pub fn parabolic_at(&self, x: &ModelPoint) -> AlgebraBasis {
        lie::stabilizer_of(&self.algebra, &self.point_representation(), &x.representative)
    }

    /// Residual of `X` off the declared complement.
    pub fn g_minus_residual(&self, x: &DMatrix<f64>) -> f64 {
        self.g_minus.residual(x)
    }

    /// Group element of the model from a matrix, checking membership.
    pub fn group_element(&self, m: DMatrix<f64>) -> Result<GroupElement> {
        GroupElement::new(m, self.tag().clone())
    }

    pub fn algebra_element(&self, m: DMatrix<f64>) -> Result<AlgebraElement> {
        AlgebraElement::new(m, self.tag().clone())
    }

    /// Complex scalar `a + ib` acting on a real-represented vector.
    pub fn complex_scale(&self, v: &DVector<f64>, a: f64, b: f64) -> DVector<f64> {
        let j = linalg::complex_structure(self.complex_size());
        v * a + (&j * v) * b
    }
}

/// Flow identity on the model: with `s(g) = g^{-1} . alpha`, compares
/// `s(u exp X)` against `exp(-X) . alpha` for `u` in the stabilizer of `alpha`.
///
/// Returns the residual norm. `X` must lie in the block-lower complement.
pub fn flow_identity_check(
    model: &HomogeneousModel,
    datum: &ReductionDatum,
    u: &GroupElement,
    x: &AlgebraElement,
) -> Result<f64> {
    datum.validate(model)?;
    let scale = x.matrix.norm().max(1.0);
    let off = model.g_minus_residual(&x.matrix);
    if off > 1e-10 * scale {
        return Err(Error::InvalidDirection(off));
    }
    let alpha = datum.flat();
    let su = datum.transported(&u.matrix)?;
    let base = (&su - &alpha).norm();
    if base > 1e-9 * alpha.norm().max(1.0) {
        return Err(Error::ScenarioMismatch(format!(
            "u does not fix the datum (residual {base:.3e})"
        )));
    }
    let ex = lie::exponential(x, 1e-12)?;
    let lhs = datum.transported(&(&u.matrix * &ex.matrix))?;
    let rep = datum.representation();
    let eminus = lie::expm(&(-&x.matrix));
    let rhs = rep.act_group(&eminus, &ex.matrix, &alpha);
    Ok((lhs - rhs).norm())
}

/// The model solution `g -> g^{-1} . alpha` evaluated at `g`.
pub fn model_solution_value(datum: &ReductionDatum, g: &GroupElement) -> Result<ReductionDatum> {
    datum.act(&lie::checked_inverse(&g.matrix)?)
}

/// `(h, h ∩ p_x)` for the stabilizer `h` of the datum.
pub fn stabilizer_pair(
    model: &HomogeneousModel,
    datum: &ReductionDatum,
    x: &ModelPoint,
) -> Result<(AlgebraBasis, AlgebraBasis)> {
    datum.validate(model)?;
    model.validate_point(x, 1e-9)?;
    let h = datum.stabilizer(model);
    let px = model.parabolic_at(x);
    let inter = lie::intersect_algebras(&h, &px)?;
    Ok((h, inter))
}

/// Number of sampled stabilizer elements `h` with `p_type(h x) != p_type(x)`.
pub fn h_orbit_invariance_check(
    model: &HomogeneousModel,
    datum: &ReductionDatum,
    x: &ModelPoint,
    n_group_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<usize> {
    let h = datum.stabilizer(model);
    let base = p_type(model, datum, x, tol)?.label;
    let mut rng = sampling::sample_rng(seed, u64::MAX);
    let mut bad = 0;
    for _ in 0..n_group_samples {
        let g = random_group_element(&h, 1.0, &mut rng);
        let moved = ModelPoint::new(&g * &x.representative, x.mode)?;
        if p_type(model, datum, &moved, tol)?.label != base {
            bad += 1;
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests;
