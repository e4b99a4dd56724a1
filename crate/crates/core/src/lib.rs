//! Curved orbit decompositions of holonomy reductions of Cartan geometries.
//!
//! The crate is organized bottom-up:
//!
//! * [`forms`]: symmetric and Hermitian forms with signature classification.
//! * [`lie`]: matrix Lie algebras, exponentials, stabilizers and intersections.
//! * [`model`]: homogeneous models `G/P`, P-type classifiers and orbit sampling.
//! * [`tractor`]: chart geometry, tractor connections, transport and holonomy.
//! * [`bgg`]: parallel sections, normal solutions, zero loci and Einstein checks.

pub mod bgg;
pub mod error;
pub mod forms;
pub mod jet;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod report;
pub mod tractor;

pub use error::{Error, Result};
pub use forms::{AnyForm, Form, HermitianForm, Signature, SymmetricForm, VectorClass};
pub use lie::{AlgebraBasis, AlgebraElement, AlgebraTag, GroupElement, Representation};
pub use model::{HomogeneousModel, Label, ModelKind, ModelPoint, ReductionDatum};
pub use report::StrataReport;
