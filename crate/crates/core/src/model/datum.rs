use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{HomogeneousModel, ModelKind};
use crate::error::{Error, Result};
use crate::forms::{AnyForm, Form, FormJson, HermitianForm, SymmetricForm};
use crate::lie::three_form::ThreeForm;
use crate::lie::{self, AlgebraBasis, Representation};
use crate::linalg;

/// The value `alpha` of a holonomy reduction on the model, in standard coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum ReductionDatum {
    SymmetricForm(SymmetricForm),
    Vector(DVector<f64>),
    HermitianForm(HermitianForm),
    /// Complex structure `J`, orthogonal for the ambient form.
    ComplexStructure(DMatrix<f64>),
    ThreeForm(ThreeForm),
}

/// JSON wire format of a datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumJson {
    SymmetricForm { form: FormJson },
    HermitianForm { form: FormJson },
    /// Real vector; complex vectors give real parts then imaginary parts.
    Vector { entries: Vec<f64> },
    /// Row-major `J`.
    ComplexStructure { dim: usize, entries: Vec<f64> },
    /// Terms like `"123"` or `"-257"` (1-based indices).
    ThreeForm { dim: usize, terms: Vec<String> },
}

impl TryFrom<&DatumJson> for ReductionDatum {
    type Error = Error;
    fn try_from(j: &DatumJson) -> Result<Self> {
        Ok(match j {
            DatumJson::SymmetricForm { form } => match AnyForm::try_from(form)? {
                AnyForm::Symmetric(s) => ReductionDatum::SymmetricForm(s),
                AnyForm::Hermitian(_) => {
                    return Err(Error::InvalidDatum("symmetric_form given a hermitian form".into()))
                }
            },
            DatumJson::HermitianForm { form } => match AnyForm::try_from(form)? {
                AnyForm::Hermitian(h) => ReductionDatum::HermitianForm(h),
                AnyForm::Symmetric(_) => {
                    return Err(Error::InvalidDatum("hermitian_form given a symmetric form".into()))
                }
            },
            DatumJson::Vector { entries } => ReductionDatum::Vector(DVector::from_vec(entries.clone())),
            DatumJson::ComplexStructure { dim, entries } => {
                if entries.len() != dim * dim {
                    return Err(Error::InvalidDatum(format!("expected {} entries", dim * dim)));
                }
                ReductionDatum::ComplexStructure(DMatrix::from_row_slice(*dim, *dim, entries))
            }
            DatumJson::ThreeForm { dim, terms } => {
                ReductionDatum::ThreeForm(ThreeForm::parse_terms(*dim, terms)?)
            }
        })
    }
}

impl ReductionDatum {
    pub fn variant_name(&self) -> &'static str {
        match self {
            ReductionDatum::SymmetricForm(_) => "symmetric_form",
            ReductionDatum::Vector(_) => "vector",
            ReductionDatum::HermitianForm(_) => "hermitian_form",
            ReductionDatum::ComplexStructure(_) => "complex_structure",
            ReductionDatum::ThreeForm(_) => "three_form",
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            ReductionDatum::SymmetricForm(_) | ReductionDatum::HermitianForm(_) => {
                Representation::SymmetricBilinear
            }
            ReductionDatum::Vector(_) => Representation::Vector,
            ReductionDatum::ComplexStructure(_) => Representation::Adjoint,
            ReductionDatum::ThreeForm(_) => Representation::ThreeForm,
        }
    }

    /// Flattened tensor in the datum's representation.
    pub fn flat(&self) -> DVector<f64> {
        match self {
            ReductionDatum::SymmetricForm(s) => linalg::flatten(s.matrix()),
            ReductionDatum::HermitianForm(h) => linalg::flatten(h.real_matrix()),
            ReductionDatum::Vector(v) => v.clone(),
            ReductionDatum::ComplexStructure(j) => linalg::flatten(j),
            ReductionDatum::ThreeForm(f) => f.coeffs.clone(),
        }
    }

    fn from_flat_like(&self, flat: DVector<f64>) -> Result<Self> {
        Ok(match self {
            ReductionDatum::SymmetricForm(s) => {
                let n = s.dim();
                ReductionDatum::SymmetricForm(SymmetricForm::with_tolerance(
                    linalg::unflatten(&flat, n, n),
                    1e-9,
                )?)
            }
            ReductionDatum::HermitianForm(h) => {
                let n = h.real_matrix().nrows();
                ReductionDatum::HermitianForm(HermitianForm::from_real_representation_with_tolerance(
                    linalg::unflatten(&flat, n, n),
                    1e-9,
                )?)
            }
            ReductionDatum::Vector(_) => ReductionDatum::Vector(flat),
            ReductionDatum::ComplexStructure(j) => {
                ReductionDatum::ComplexStructure(linalg::unflatten(&flat, j.nrows(), j.ncols()))
            }
            ReductionDatum::ThreeForm(f) => ReductionDatum::ThreeForm(ThreeForm::from_coeffs(f.n, flat)?),
        })
    }

    /// `g . alpha` given `g`.
    pub fn act(&self, g: &DMatrix<f64>) -> Result<Self> {
        let ginv = lie::checked_inverse(g)?;
        self.from_flat_like(self.representation().act_group(g, &ginv, &self.flat()))
    }

    /// Flattened `g^{-1} . alpha`, the model solution at `g`.
    pub fn transported(&self, g: &DMatrix<f64>) -> Result<DVector<f64>> {
        let ginv = lie::checked_inverse(g)?;
        Ok(self.representation().act_group(&ginv, g, &self.flat()))
    }

    /// Stabilizer algebra inside the model's `g`.
    pub fn stabilizer(&self, model: &HomogeneousModel) -> AlgebraBasis {
        lie::stabilizer_of(&model.algebra, &self.representation(), &self.flat())
    }

    /// Checks the variant invariants and compatibility with the model.
    pub fn validate(&self, model: &HomogeneousModel) -> Result<()> {
        let m = model.ambient_dim();
        let mismatch = |what: &str| {
            Err(Error::ScenarioMismatch(format!("{} datum on {what} model", self.variant_name())))
        };
        match (self, model.kind) {
            (ReductionDatum::SymmetricForm(s), ModelKind::Projective { .. }) => {
                if s.dim() != m {
                    return Err(Error::DimensionError(format!("form of size {} on R^{m}", s.dim())));
                }
                if !s.signature().is_nondegenerate() {
                    return Err(Error::InvalidDatum(format!("degenerate form {}", s.signature())));
                }
            }
            (ReductionDatum::HermitianForm(h), ModelKind::ComplexProjective { .. }) => {
                if h.real_matrix().nrows() != m {
                    return Err(Error::DimensionError("hermitian form size".into()));
                }
                if !h.signature().is_nondegenerate() {
                    return Err(Error::InvalidDatum(format!("degenerate form {}", h.signature())));
                }
            }
            (ReductionDatum::Vector(v), ModelKind::Conformal { .. } | ModelKind::Cr { .. }) => {
                if v.len() != m {
                    return Err(Error::DimensionError(format!("vector of length {} in R^{m}", v.len())));
                }
                if v.norm() <= 1e-12 {
                    return Err(Error::InvalidDatum("zero vector".into()));
                }
                if let ModelKind::Cr { .. } = model.kind {
                    let f = model.form.as_ref().expect("CR model has a form");
                    if f.eval(v, v).abs() <= 1e-9 * f.spectral_scale() * v.norm_squared() {
                        return Err(Error::InvalidDatum("CR reduction needs a non-null vector".into()));
                    }
                }
            }
            (ReductionDatum::ComplexStructure(j), ModelKind::Conformal { .. }) => {
                if j.nrows() != m || j.ncols() != m {
                    return Err(Error::DimensionError("complex structure size".into()));
                }
                let id = DMatrix::<f64>::identity(m, m);
                if (j * j + &id).norm() > 1e-10 {
                    return Err(Error::InvalidDatum("J^2 != -I".into()));
                }
                let s = model.form.as_ref().expect("conformal model has a form").real_matrix();
                if (j.transpose() * s * j - s).norm() > 1e-10 {
                    return Err(Error::InvalidDatum("J is not orthogonal".into()));
                }
            }
            (ReductionDatum::ThreeForm(f), ModelKind::Conformal { .. }) => {
                if f.n != m {
                    return Err(Error::DimensionError(format!("3-form on R^{} in R^{m}", f.n)));
                }
            }
            (_, ModelKind::Projective { .. }) => return mismatch("projective"),
            (_, ModelKind::ComplexProjective { .. }) => return mismatch("complex projective"),
            (_, ModelKind::Conformal { .. }) => return mismatch("conformal"),
            (_, ModelKind::Cr { .. }) => return mismatch("CR"),
        }
        Ok(())
    }
}
