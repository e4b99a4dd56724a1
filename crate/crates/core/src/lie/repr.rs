//! Tensor representations of matrix groups, flattened to vectors.

use nalgebra::{DMatrix, DVector};

use super::three_form::ThreeForm;
use crate::linalg::{self, complex_structure};

/// A linear action of `gl(n)` (and `GL(n)`) on a flattened tensor space.
///
/// `Ray` and `ComplexLine` are not linear actions on a vector space; for them
/// `act` returns the component of `A v` transverse to the ray (resp. complex
/// line) through `v`, whose kernel is the stabilizer algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Vector,
    /// `S^2 (R^n)*`, `g . B = g^{-T} B g^{-1}`.
    SymmetricBilinear,
    /// `Lambda^3 (R^n)*`.
    ThreeForm,
    /// Endomorphisms by conjugation (adjoint, complex structures).
    Adjoint,
    Ray,
    ComplexLine,
}

impl Representation {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "vector" => Representation::Vector,
            "symmetric_bilinear" => Representation::SymmetricBilinear,
            "three_form" => Representation::ThreeForm,
            "adjoint" => Representation::Adjoint,
            "ray" => Representation::Ray,
            "complex_line" => Representation::ComplexLine,
            _ => return None,
        })
    }

    /// Infinitesimal action `A . v` on the flattened tensor `v`.
    pub fn act(&self, a: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = a.nrows();
        match self {
            Representation::Vector => a * v,
            Representation::SymmetricBilinear => {
                let b = linalg::unflatten(v, n, n);
                linalg::flatten(&(-(a.transpose() * &b + &b * a)))
            }
            Representation::ThreeForm => {
                ThreeForm::from_coeffs(n, v.clone()).expect("3-form length").act_algebra(a)
            }
            Representation::Adjoint => {
                let b = linalg::unflatten(v, n, n);
                linalg::flatten(&(a * &b - &b * a))
            }
            Representation::Ray => {
                let av = a * v;
                let u = v / v.norm();
                &av - &u * u.dot(&av)
            }
            Representation::ComplexLine => {
                let av = a * v;
                let u = v / v.norm();
                let ju = complex_structure(n / 2) * &u;
                &av - &u * u.dot(&av) - &ju * ju.dot(&av)
            }
        }
    }

    /// Group action `g . v`.
    pub fn act_group(&self, g: &DMatrix<f64>, ginv: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = g.nrows();
        match self {
            Representation::Vector | Representation::Ray | Representation::ComplexLine => g * v,
            Representation::SymmetricBilinear => {
                let b = linalg::unflatten(v, n, n);
                linalg::flatten(&(ginv.transpose() * b * ginv))
            }
            Representation::ThreeForm => {
                ThreeForm::from_coeffs(n, v.clone())
                    .expect("3-form length")
                    .act_group_inv(ginv)
                    .coeffs
            }
            Representation::Adjoint => {
                let b = linalg::unflatten(v, n, n);
                linalg::flatten(&(g * b * ginv))
            }
        }
    }
}
