//! Signature-aware symmetric and Hermitian forms.
//!
//! Hermitian forms on `C^n` are stored through the real part of `h(z, w)`,
//! a symmetric `2n x 2n` matrix commuting with `J0 = [[0, -I], [I, 0]]`.
//! Complex vectors are real vectors `(Re z, Im z)` of length `2n`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative zero threshold for eigenvalues and pairings.
pub const ZERO_TOL: f64 = 1e-9;
/// Relative tolerance for the symmetry / Hermitian invariants.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Rank threshold for subspace bases.
pub const BASIS_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub null: usize,
}

impl Signature {
    pub fn new(positive: usize, negative: usize, null: usize) -> Self {
        Signature { positive, negative, null }
    }

    pub fn dim(&self) -> usize {
        self.positive + self.negative + self.null
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.null == 0
    }

    /// Signature of the negated form.
    pub fn flipped(&self) -> Self {
        Signature::new(self.negative, self.positive, self.null)
    }

    /// Counts eigenvalues with a threshold relative to the spectral radius.
    pub fn from_eigenvalues(ev: &[f64], zero_tol: f64) -> Self {
        let scale = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let eps = if scale < zero_tol { zero_tol } else { zero_tol * scale };
        let mut s = Signature::new(0, 0, 0);
        for &l in ev {
            if l > eps {
                s.positive += 1;
            } else if l < -eps {
                s.negative += 1;
            } else {
                s.null += 1;
            }
        }
        s
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.positive, self.negative, self.null)
    }
}

/// Causal character of a vector with respect to a form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VectorClass {
    Pos,
    Null,
    Neg,
}

/// Operations shared by real symmetric and complex Hermitian forms.
pub trait Form: Sized {
    /// Dimension over the ground field.
    fn dim(&self) -> usize;
    /// Real symmetric matrix of the (real part of the) form.
    fn real_matrix(&self) -> &DMatrix<f64>;
    fn signature(&self) -> Signature;
    /// Gram matrix on the span of `basis`.
    fn restrict(&self, basis: &[DVector<f64>]) -> Result<Self>;
    /// Orthogonal complement of the span of `basis`, as a real basis.
    fn orthocomplement(&self, basis: &[DVector<f64>]) -> Result<Vec<DVector<f64>>>;

    /// Real part of the form on two (real-represented) vectors.
    fn eval(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * self.real_matrix() * w)[(0, 0)]
    }

    /// Largest absolute eigenvalue.
    fn spectral_scale(&self) -> f64 {
        linalg::symmetric_eigenvalues(self.real_matrix())
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()))
    }

    fn classify_vector(&self, v: &DVector<f64>) -> Result<VectorClass> {
        if v.len() != self.real_matrix().nrows() {
            return Err(Error::DimensionError(format!(
                "vector of length {} for form of real dimension {}",
                v.len(),
                self.real_matrix().nrows()
            )));
        }
        let norm = v.norm();
        if norm <= 1e-12 {
            return Err(Error::InvalidPoint("zero vector".into()));
        }
        let q = self.eval(v, v);
        let scale = self.spectral_scale().max(f64::MIN_POSITIVE);
        let eps = ZERO_TOL * scale * norm * norm;
        Ok(if q > eps {
            VectorClass::Pos
        } else if q < -eps {
            VectorClass::Neg
        } else {
            VectorClass::Null
        })
    }
}

fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::InvalidForm(format!("non-square {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidForm("non-finite entry".into()));
    }
    let scale = linalg::max_abs(m).max(1.0);
    let asym = linalg::max_abs(&(m - m.transpose()));
    if asym > tol * scale {
        return Err(Error::InvalidForm(format!("asymmetry {asym:.3e}")));
    }
    Ok(linalg::symmetrize(m))
}

#[derive(Debug, Clone)]
pub struct SymmetricForm {
    matrix: DMatrix<f64>,
    signature_cache: OnceLock<Signature>,
}

impl PartialEq for SymmetricForm {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl SymmetricForm {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, SYMMETRY_TOL)
    }

    /// Accepts matrices asymmetric up to `tol` (relative) and symmetrizes them.
    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let matrix = check_symmetric(&matrix, tol)?;
        Ok(SymmetricForm { matrix, signature_cache: OnceLock::new() })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        SymmetricForm::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
            .expect("diagonal matrices are symmetric")
    }

    /// `diag(+1 x p, -1 x q)`.
    pub fn standard(p: usize, q: usize) -> Self {
        SymmetricForm::new(linalg::diag_pq(p, q)).expect("symmetric")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The congruent form `A^T M A`.
    pub fn congruent(&self, a: &DMatrix<f64>) -> Result<Self> {
        SymmetricForm::with_tolerance(a.transpose() * &self.matrix * a, 1e-9)
    }
}

impl Form for SymmetricForm {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn real_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    fn signature(&self) -> Signature {
        *self.signature_cache.get_or_init(|| {
            Signature::from_eigenvalues(&linalg::symmetric_eigenvalues(&self.matrix), ZERO_TOL)
        })
    }

    fn restrict(&self, basis: &[DVector<f64>]) -> Result<Self> {
        let b = basis_matrix(basis, self.dim())?;
        let r = linalg::rank(&b, BASIS_RANK_TOL, 0.0);
        if r < basis.len() {
            return Err(Error::DegenerateBasis { rank: r, expected: basis.len() });
        }
        SymmetricForm::with_tolerance(b.transpose() * &self.matrix * &b, 1e-9)
    }

    fn orthocomplement(&self, basis: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        if !self.signature().is_nondegenerate() {
            return Err(Error::DegenerateForm(format!("signature {}", self.signature())));
        }
        let b = basis_matrix(basis, self.dim())?;
        let constraints = b.transpose() * &self.matrix;
        Ok(columns(&linalg::nullspace(&constraints, BASIS_RANK_TOL)))
    }
}

#[derive(Debug, Clone)]
pub struct HermitianForm {
    /// Real part of `h`, as a `2n x 2n` symmetric matrix commuting with `J0`.
    real: DMatrix<f64>,
    signature_cache: OnceLock<Signature>,
}

impl PartialEq for HermitianForm {
    fn eq(&self, other: &Self) -> bool {
        self.real == other.real
    }
}

impl HermitianForm {
    /// From the complex matrix `re + i im` (Hermitian: `re` symmetric, `im` skew).
    pub fn from_complex(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionError("re/im shape mismatch".into()));
        }
        Self::from_real_representation(linalg::complex_to_real(re, im))
    }

    pub fn from_real_representation(real: DMatrix<f64>) -> Result<Self> {
        Self::from_real_representation_with_tolerance(real, SYMMETRY_TOL)
    }

    pub fn from_real_representation_with_tolerance(real: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !real.nrows().is_multiple_of(2) {
            return Err(Error::InvalidForm("odd real dimension".into()));
        }
        let real = check_symmetric(&real, tol)?;
        let j = linalg::complex_structure(real.nrows() / 2);
        let comm = linalg::max_abs(&(&real * &j - &j * &real));
        if comm > tol * linalg::max_abs(&real).max(1.0) {
            return Err(Error::InvalidForm(format!("not complex-linear (commutator {comm:.3e})")));
        }
        // Average over the J0 conjugation to remove drift.
        let real = (&real + j.transpose() * &real * &j) * 0.5;
        Ok(HermitianForm { real, signature_cache: OnceLock::new() })
    }

    /// Diagonal Hermitian form `diag(+1 x p, -1 x q)` on `C^{p+q}`.
    pub fn standard(p: usize, q: usize) -> Self {
        let d = linalg::diag_pq(p, q);
        HermitianForm::from_complex(&d, &DMatrix::zeros(p + q, p + q)).expect("hermitian")
    }

    /// Complex matrix `(re, im)`.
    pub fn complex_parts(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        linalg::real_to_complex(&self.real)
    }

    /// Complex value `h(v, w) = v^* H w` as `(re, im)`.
    pub fn eval_complex(&self, v: &DVector<f64>, w: &DVector<f64>) -> (f64, f64) {
        let j = linalg::complex_structure(self.dim());
        let re = (v.transpose() * &self.real * w)[(0, 0)];
        let im = ((&j * v).transpose() * &self.real * w)[(0, 0)];
        (re, im)
    }

    /// Complex conjugate-linear span rank of real-represented vectors.
    fn complex_rank(&self, b: &DMatrix<f64>) -> usize {
        let j = linalg::complex_structure(self.dim());
        let jb = &j * b;
        let mut both = DMatrix::zeros(b.nrows(), 2 * b.ncols());
        both.view_mut((0, 0), b.shape()).copy_from(b);
        both.view_mut((0, b.ncols()), b.shape()).copy_from(&jb);
        linalg::rank(&both, BASIS_RANK_TOL, 0.0) / 2
    }
}

impl Form for HermitianForm {
    fn dim(&self) -> usize {
        self.real.nrows() / 2
    }

    fn real_matrix(&self) -> &DMatrix<f64> {
        &self.real
    }

    fn signature(&self) -> Signature {
        *self.signature_cache.get_or_init(|| {
            let s = Signature::from_eigenvalues(&linalg::symmetric_eigenvalues(&self.real), ZERO_TOL);
            // Every eigenvalue of the real representation appears twice.
            Signature::new(s.positive / 2, s.negative / 2, s.null / 2)
        })
    }

    fn restrict(&self, basis: &[DVector<f64>]) -> Result<Self> {
        let b = basis_matrix(basis, 2 * self.dim())?;
        let r = self.complex_rank(&b);
        if r < basis.len() {
            return Err(Error::DegenerateBasis { rank: r, expected: basis.len() });
        }
        let k = basis.len();
        let mut re = DMatrix::zeros(k, k);
        let mut im = DMatrix::zeros(k, k);
        for i in 0..k {
            for l in 0..k {
                let (a, c) = self.eval_complex(&basis[i], &basis[l]);
                re[(i, l)] = a;
                im[(i, l)] = c;
            }
        }
        let re = linalg::symmetrize(&re);
        let im = (&im - im.transpose()) * 0.5;
        HermitianForm::from_real_representation_with_tolerance(linalg::complex_to_real(&re, &im), 1e-9)
    }

    fn orthocomplement(&self, basis: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        if !self.signature().is_nondegenerate() {
            return Err(Error::DegenerateForm(format!("signature {}", self.signature())));
        }
        let n2 = 2 * self.dim();
        let b = basis_matrix(basis, n2)?;
        let j = linalg::complex_structure(self.dim());
        let jb = &j * &b;
        let mut rows = DMatrix::zeros(2 * b.ncols(), n2);
        let mb = (&self.real * &b).transpose();
        let mjb = (&self.real * &jb).transpose();
        rows.view_mut((0, 0), (b.ncols(), n2)).copy_from(&mb);
        rows.view_mut((b.ncols(), 0), (b.ncols(), n2)).copy_from(&mjb);
        Ok(columns(&linalg::nullspace(&rows, BASIS_RANK_TOL)))
    }
}

fn basis_matrix(basis: &[DVector<f64>], n: usize) -> Result<DMatrix<f64>> {
    if basis.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionError(format!("basis vectors must have length {n}")));
    }
    if basis.is_empty() {
        return Ok(DMatrix::zeros(n, 0));
    }
    Ok(DMatrix::from_columns(basis))
}

pub(crate) fn columns(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

/// Either kind of form, for places that accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyForm {
    Symmetric(SymmetricForm),
    Hermitian(HermitianForm),
}

impl AnyForm {
    pub fn is_hermitian(&self) -> bool {
        matches!(self, AnyForm::Hermitian(_))
    }

    pub fn real_dim(&self) -> usize {
        self.real_matrix().nrows()
    }
}

impl Form for AnyForm {
    fn dim(&self) -> usize {
        match self {
            AnyForm::Symmetric(f) => f.dim(),
            AnyForm::Hermitian(f) => f.dim(),
        }
    }
    fn real_matrix(&self) -> &DMatrix<f64> {
        match self {
            AnyForm::Symmetric(f) => f.real_matrix(),
            AnyForm::Hermitian(f) => f.real_matrix(),
        }
    }
    fn signature(&self) -> Signature {
        match self {
            AnyForm::Symmetric(f) => f.signature(),
            AnyForm::Hermitian(f) => f.signature(),
        }
    }
    fn restrict(&self, basis: &[DVector<f64>]) -> Result<Self> {
        Ok(match self {
            AnyForm::Symmetric(f) => AnyForm::Symmetric(f.restrict(basis)?),
            AnyForm::Hermitian(f) => AnyForm::Hermitian(f.restrict(basis)?),
        })
    }
    fn orthocomplement(&self, basis: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        match self {
            AnyForm::Symmetric(f) => f.orthocomplement(basis),
            AnyForm::Hermitian(f) => f.orthocomplement(basis),
        }
    }
}

/// JSON wire format: `{"kind", "dim", "entries"}` with row-major entries,
/// real/imaginary parts interleaved for Hermitian forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormJson {
    pub kind: String,
    pub dim: usize,
    pub entries: Vec<f64>,
}

impl From<&AnyForm> for FormJson {
    fn from(f: &AnyForm) -> Self {
        match f {
            AnyForm::Symmetric(s) => {
                let n = s.dim();
                let mut entries = Vec::with_capacity(n * n);
                for i in 0..n {
                    for k in 0..n {
                        entries.push(s.matrix()[(i, k)]);
                    }
                }
                FormJson { kind: "symmetric".into(), dim: n, entries }
            }
            AnyForm::Hermitian(h) => {
                let n = h.dim();
                let (re, im) = h.complex_parts();
                let mut entries = Vec::with_capacity(2 * n * n);
                for i in 0..n {
                    for k in 0..n {
                        entries.push(re[(i, k)]);
                        entries.push(im[(i, k)]);
                    }
                }
                FormJson { kind: "hermitian".into(), dim: n, entries }
            }
        }
    }
}

impl TryFrom<&FormJson> for AnyForm {
    type Error = Error;
    fn try_from(j: &FormJson) -> Result<Self> {
        let n = j.dim;
        match j.kind.as_str() {
            "symmetric" => {
                if j.entries.len() != n * n {
                    return Err(Error::InvalidForm(format!("expected {} entries", n * n)));
                }
                Ok(AnyForm::Symmetric(SymmetricForm::new(DMatrix::from_row_slice(n, n, &j.entries))?))
            }
            "hermitian" => {
                if j.entries.len() != 2 * n * n {
                    return Err(Error::InvalidForm(format!("expected {} entries", 2 * n * n)));
                }
                let re = DMatrix::from_fn(n, n, |i, k| j.entries[2 * (i * n + k)]);
                let im = DMatrix::from_fn(n, n, |i, k| j.entries[2 * (i * n + k) + 1]);
                Ok(AnyForm::Hermitian(HermitianForm::from_complex(&re, &im)?))
            }
            other => Err(Error::InvalidForm(format!("unknown kind {other}"))),
        }
    }
}
