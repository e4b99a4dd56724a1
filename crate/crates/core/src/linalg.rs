//! Dense linear-algebra helpers shared by every module: SVD nullspaces,
//! ranks, orthonormal spans and symmetric spectra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold for nullspace and rank decisions.
pub const NULLSPACE_REL_TOL: f64 = 1e-8;

fn padded_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let work = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    (svd.singular_values.iter().copied().collect(), vt)
}

/// Orthonormal basis (as columns) of the nullspace of `a`; singular values
/// below `rel_tol * sigma_max` count as zero.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let (sv, vt) = padded_svd(a);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| smax == 0.0 || **s <= rel_tol * smax)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Numerical rank with a relative threshold and an absolute floor.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64, abs_floor: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax <= abs_floor {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax).count()
}

/// Orthonormal basis for the column span of `a`.
pub fn column_span(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > rel_tol * smax)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(a.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `(M + M^T) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Flatten a matrix into a vector (column-major, matching nalgebra storage).
pub fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`flatten`].
pub fn unflatten(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Frobenius inner product.
pub fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Diagonal matrix with `p` entries +1 followed by `q` entries -1.
pub fn diag_pq(p: usize, q: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(p + q, p + q);
    for i in 0..p + q {
        d[(i, i)] = if i < p { 1.0 } else { -1.0 };
    }
    d
}

/// The standard complex structure `[[0, -I], [I, 0]]` on `R^{2n}`.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// Real `2n x 2n` representation of the complex matrix `re + i im`.
pub fn complex_to_real(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<f64> {
    let n = re.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(re);
    m.view_mut((n, n), (n, n)).copy_from(re);
    m.view_mut((0, n), (n, n)).copy_from(&(-im));
    m.view_mut((n, 0), (n, n)).copy_from(im);
    m
}

/// Splits a real representation back into `(re, im)`.
pub fn real_to_complex(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
    )
}
