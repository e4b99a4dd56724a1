use nalgebra::DVector;
use serde::Serialize;

use super::{HomogeneousModel, ModelKind, ModelPoint, ReductionDatum};
use crate::error::{Error, Result};
use crate::forms::{Form, ZERO_TOL};
use crate::lie;
use crate::linalg;

/// Orbit labels across all scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Plus,
    Zero,
    Minus,
    IsolatedPlus,
    IsolatedMinus,
    Hypersurface,
    OpenPlus,
    OpenMinus,
    Open,
    Single,
    /// Within the ambiguity band of a stratum boundary.
    Ambiguous,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Plus => "PLUS",
            Label::Zero => "ZERO",
            Label::Minus => "MINUS",
            Label::IsolatedPlus => "ISOLATED_PLUS",
            Label::IsolatedMinus => "ISOLATED_MINUS",
            Label::Hypersurface => "HYPERSURFACE",
            Label::OpenPlus => "OPEN_PLUS",
            Label::OpenMinus => "OPEN_MINUS",
            Label::Open => "OPEN",
            Label::Single => "SINGLE",
            Label::Ambiguous => "AMBIGUOUS",
        }
    }

    /// Whether the orbit is open in `G/P`.
    pub fn is_open(&self) -> bool {
        matches!(self, Label::Plus | Label::Minus | Label::OpenPlus | Label::OpenMinus | Label::Open | Label::Single)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The classifier family selected by a (model, datum) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Symmetric form on the projective sphere.
    ProjectiveMetric,
    /// Non-null vector on the conformal sphere.
    ConformalNonNull,
    /// Null vector on the conformal sphere.
    ConformalNull,
    /// Hermitian form on `CP^n`.
    HermitianMetric,
    /// Non-null vector on the CR sphere.
    CrVector,
    ComplexStructure,
    ThreeForm,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::ProjectiveMetric => "projective_metric",
            ScenarioKind::ConformalNonNull => "conformal_non_null",
            ScenarioKind::ConformalNull => "conformal_null",
            ScenarioKind::HermitianMetric => "hermitian_metric",
            ScenarioKind::CrVector => "cr_vector",
            ScenarioKind::ComplexStructure => "complex_structure",
            ScenarioKind::ThreeForm => "three_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PTypeLabel {
    pub scenario: ScenarioKind,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative threshold for a vanishing pairing.
    pub zero_tol: f64,
    /// Pairings within `ambiguity_factor * zero_tol` of zero but above it are ambiguous.
    pub ambiguity_factor: f64,
    /// Euclidean distance between unit representatives that counts as the same ray.
    pub ray_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { zero_tol: ZERO_TOL, ambiguity_factor: 100.0, ray_tol: 1e-6 }
    }
}

pub fn scenario_kind(model: &HomogeneousModel, datum: &ReductionDatum) -> Result<ScenarioKind> {
    datum.validate(model)?;
    Ok(match (datum, model.kind) {
        (ReductionDatum::SymmetricForm(_), _) => ScenarioKind::ProjectiveMetric,
        (ReductionDatum::HermitianForm(_), _) => ScenarioKind::HermitianMetric,
        (ReductionDatum::Vector(_), ModelKind::Cr { .. }) => ScenarioKind::CrVector,
        (ReductionDatum::Vector(v), _) => {
            let f = model.form.as_ref().expect("conformal form");
            if f.eval(v, v).abs() <= ZERO_TOL * f.spectral_scale() * v.norm_squared() {
                ScenarioKind::ConformalNull
            } else {
                ScenarioKind::ConformalNonNull
            }
        }
        (ReductionDatum::ComplexStructure(_), _) => ScenarioKind::ComplexStructure,
        (ReductionDatum::ThreeForm(_), _) => ScenarioKind::ThreeForm,
    })
}

/// Sign label of a pairing `f` with natural scale `scale`.
fn sign_label(f: f64, scale: f64, tol: &Tolerances, plus: Label, zero: Label, minus: Label) -> Label {
    let eps = tol.zero_tol * scale;
    if f.abs() <= eps {
        zero
    } else if f.abs() <= tol.ambiguity_factor * eps {
        Label::Ambiguous
    } else if f > 0.0 {
        plus
    } else {
        minus
    }
}

/// The defining pairing(s) of the scenario at `x`, with their natural scale.
///
/// Projective/Hermitian: `h(x, x)`; conformal: `h(x, v)`; CR: `(Re, Im) h(x, v)`.
pub(crate) fn pairing(model: &HomogeneousModel, datum: &ReductionDatum, x: &DVector<f64>) -> (Vec<f64>, f64) {
    match datum {
        ReductionDatum::SymmetricForm(s) => (vec![s.eval(x, x)], s.spectral_scale() * x.norm_squared()),
        ReductionDatum::HermitianForm(h) => (vec![h.eval(x, x)], h.spectral_scale() * x.norm_squared()),
        ReductionDatum::Vector(v) => {
            let f = model.form.as_ref().expect("vector data live on form models");
            let scale = f.spectral_scale() * x.norm() * v.norm();
            match model.kind {
                ModelKind::Cr { .. } => {
                    let (re, im) = match f {
                        crate::forms::AnyForm::Hermitian(h) => h.eval_complex(x, v),
                        crate::forms::AnyForm::Symmetric(_) => unreachable!("CR form is Hermitian"),
                    };
                    (vec![re, im], scale)
                }
                _ => (vec![f.eval(x, v)], scale),
            }
        }
        ReductionDatum::ComplexStructure(j) => {
            let f = model.form.as_ref().expect("conformal form");
            (vec![f.eval(x, &(j * x))], f.spectral_scale() * x.norm_squared())
        }
        ReductionDatum::ThreeForm(phi) => (vec![phi.contract(x).norm()], x.norm()),
    }
}

/// P-type of the point `x` with respect to the model solution of `datum`.
pub fn p_type(
    model: &HomogeneousModel,
    datum: &ReductionDatum,
    x: &ModelPoint,
    tol: &Tolerances,
) -> Result<PTypeLabel> {
    let scenario = scenario_kind(model, datum)?;
    model.validate_point(x, tol.zero_tol)?;
    let xv = &x.representative;
    let (f, scale) = pairing(model, datum, xv);
    let label = match scenario {
        ScenarioKind::ProjectiveMetric | ScenarioKind::HermitianMetric | ScenarioKind::ConformalNonNull => {
            sign_label(f[0], scale, tol, Label::Plus, Label::Zero, Label::Minus)
        }
        ScenarioKind::ConformalNull => {
            let ReductionDatum::Vector(v) = datum else { unreachable!() };
            let u = xv / xv.norm();
            let w = v / v.norm();
            if (&u - &w).norm() <= tol.ray_tol {
                Label::IsolatedPlus
            } else if (&u + &w).norm() <= tol.ray_tol {
                Label::IsolatedMinus
            } else if (&u - &w).norm() <= 100.0 * tol.ray_tol || (&u + &w).norm() <= 100.0 * tol.ray_tol {
                Label::Ambiguous
            } else {
                sign_label(f[0], scale, tol, Label::OpenPlus, Label::Hypersurface, Label::OpenMinus)
            }
        }
        ScenarioKind::CrVector => {
            let modulus = f[0].hypot(f[1]);
            sign_label(modulus, scale, tol, Label::Open, Label::Zero, Label::Open)
        }
        ScenarioKind::ComplexStructure => {
            // h(x, Jx) = 0 for every x: span{x, Jx} is totally isotropic.
            if f[0].abs() > tol.zero_tol * scale {
                return Err(Error::NumericalError(format!("h(x, Jx) = {:.3e} for skew J", f[0])));
            }
            Label::Single
        }
        ScenarioKind::ThreeForm => {
            if f[0] <= tol.zero_tol * scale {
                Label::Ambiguous
            } else {
                Label::Single
            }
        }
    };
    Ok(PTypeLabel { scenario, label })
}

/// Labels that occur on the model for the given data, by signature bookkeeping.
///
/// Open orbits always occur; a vanishing-pairing orbit occurs exactly when the
/// relevant restricted form is indefinite.
pub fn expected_labels(model: &HomogeneousModel, datum: &ReductionDatum) -> Result<Vec<Label>> {
    let scenario = scenario_kind(model, datum)?;
    let indefinite = |p: usize, q: usize| p > 0 && q > 0;
    let mut out = Vec::new();
    match scenario {
        ScenarioKind::ProjectiveMetric | ScenarioKind::HermitianMetric => {
            let s = match datum {
                ReductionDatum::SymmetricForm(s) => s.signature(),
                ReductionDatum::HermitianForm(h) => h.signature(),
                _ => unreachable!(),
            };
            if s.positive > 0 {
                out.push(Label::Plus);
            }
            if indefinite(s.positive, s.negative) {
                out.push(Label::Zero);
            }
            if s.negative > 0 {
                out.push(Label::Minus);
            }
        }
        ScenarioKind::ConformalNonNull => {
            out.push(Label::Plus);
            let perp = orthocomplement_signature(model, datum)?;
            if indefinite(perp.0, perp.1) {
                out.push(Label::Zero);
            }
            out.push(Label::Minus);
        }
        ScenarioKind::ConformalNull => {
            out.extend([Label::IsolatedPlus, Label::IsolatedMinus]);
            let ModelKind::Conformal { p, q } = model.kind else { unreachable!() };
            if indefinite(p, q) {
                out.push(Label::Hypersurface);
            }
            out.extend([Label::OpenPlus, Label::OpenMinus]);
        }
        ScenarioKind::CrVector => {
            let perp = orthocomplement_signature(model, datum)?;
            out.push(Label::Open);
            if indefinite(perp.0, perp.1) {
                out.push(Label::Zero);
            }
        }
        ScenarioKind::ComplexStructure | ScenarioKind::ThreeForm => out.push(Label::Single),
    }
    out.sort();
    Ok(out)
}

/// Signature `(positive, negative)` of the ambient form on `v^perp`.
fn orthocomplement_signature(model: &HomogeneousModel, datum: &ReductionDatum) -> Result<(usize, usize)> {
    let ReductionDatum::Vector(v) = datum else {
        return Err(Error::ScenarioMismatch("orthocomplement of a non-vector datum".into()));
    };
    let f = model.form.as_ref().expect("vector data live on form models");
    let perp = f.orthocomplement(std::slice::from_ref(v))?;
    // Real Gram matrix; for Hermitian forms every eigenvalue is doubled.
    let b = nalgebra::DMatrix::from_columns(&perp);
    let gram = b.transpose() * f.real_matrix() * &b;
    let s = crate::forms::SymmetricForm::with_tolerance(gram, 1e-9)?.signature();
    let k = if f.is_hermitian() { 2 } else { 1 };
    Ok((s.positive / k, s.negative / k))
}

/// Dimension of the orbit of the stabilizer `H` of `datum` through `x`,
/// computed as `dim h - dim(h ∩ p_x)`.
pub fn orbit_dimension(model: &HomogeneousModel, datum: &ReductionDatum, x: &ModelPoint) -> Result<usize> {
    let h = datum.stabilizer(model);
    orbit_dimension_with(model, &h, x)
}

pub(crate) fn orbit_dimension_with(
    model: &HomogeneousModel,
    h: &lie::AlgebraBasis,
    x: &ModelPoint,
) -> Result<usize> {
    // The tangent map A -> A.x mod x is cheaper than intersecting bases.
    let rep = model.point_representation();
    let images: Vec<DVector<f64>> = h.elements.iter().map(|a| rep.act(a, &x.representative)).collect();
    if images.is_empty() {
        return Ok(0);
    }
    let m = nalgebra::DMatrix::from_columns(&images);
    Ok(linalg::rank(&m, linalg::NULLSPACE_REL_TOL, 1e-12))
}
