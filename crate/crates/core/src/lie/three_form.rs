//! Alternating 3-forms on `R^n`, stored by their components on `i < j < k`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeForm {
    pub n: usize,
    /// Components `phi_{ijk}` for `i < j < k`, in lexicographic order.
    pub coeffs: DVector<f64>,
}

/// Number of components of a 3-form on `R^n`.
pub fn component_count(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k))))
}

/// Position of the sorted triple `i < j < k` in the component vector.
fn index_of(n: usize, i: usize, j: usize, k: usize) -> usize {
    triples(n).position(|t| t == (i, j, k)).expect("sorted triple")
}

/// Sorts a triple and returns the permutation sign (0 if an index repeats).
fn sort3(mut a: [usize; 3]) -> (f64, [usize; 3]) {
    let mut sign = 1.0;
    for (x, y) in [(0, 1), (1, 2), (0, 1)] {
        if a[x] > a[y] {
            a.swap(x, y);
            sign = -sign;
        }
    }
    if a[0] == a[1] || a[1] == a[2] {
        (0.0, a)
    } else {
        (sign, a)
    }
}

impl ThreeForm {
    pub fn zero(n: usize) -> Self {
        ThreeForm { n, coeffs: DVector::zeros(component_count(n)) }
    }

    pub fn from_coeffs(n: usize, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != component_count(n) {
            return Err(Error::InvalidDatum(format!(
                "3-form on R^{n} needs {} components, got {}",
                component_count(n),
                coeffs.len()
            )));
        }
        Ok(ThreeForm { n, coeffs })
    }

    /// Builds `sum c e^{ijk}` from 0-based index triples in any order.
    pub fn from_terms(n: usize, terms: &[([usize; 3], f64)]) -> Result<Self> {
        let mut f = ThreeForm::zero(n);
        for (idx, c) in terms {
            if idx.iter().any(|&i| i >= n) {
                return Err(Error::InvalidDatum(format!("index {idx:?} out of range for n = {n}")));
            }
            let (s, sorted) = sort3(*idx);
            if s == 0.0 {
                return Err(Error::InvalidDatum(format!("repeated index in {idx:?}")));
            }
            f.coeffs[index_of(n, sorted[0], sorted[1], sorted[2])] += s * c;
        }
        Ok(f)
    }

    /// Parses terms written as 1-based digit strings, e.g. `"123"` or `"-257"`.
    pub fn parse_terms(n: usize, terms: &[String]) -> Result<Self> {
        let mut parsed = Vec::new();
        for t in terms {
            let (c, digits) = match t.strip_prefix('-') {
                Some(rest) => (-1.0, rest),
                None => (1.0, t.trim_start_matches('+')),
            };
            let idx: Vec<usize> = digits
                .chars()
                .map(|ch| ch.to_digit(10).map(|d| d as usize))
                .collect::<Option<Vec<_>>>()
                .filter(|v| v.len() == 3 && v.iter().all(|&d| d >= 1))
                .ok_or_else(|| Error::InvalidDatum(format!("bad 3-form term {t:?}")))?;
            parsed.push(([idx[0] - 1, idx[1] - 1, idx[2] - 1], c));
        }
        ThreeForm::from_terms(n, &parsed)
    }

    /// Component `phi(e_i, e_j, e_k)` for arbitrary indices.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let (s, a) = sort3([i, j, k]);
        if s == 0.0 {
            0.0
        } else {
            s * self.coeffs[index_of(self.n, a[0], a[1], a[2])]
        }
    }

    /// Dense antisymmetric tensor `t[i][j][k]`.
    pub fn dense(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.n;
        let mut t = vec![vec![vec![0.0; n]; n]; n];
        for (idx, (i, j, k)) in triples(n).enumerate() {
            let c = self.coeffs[idx];
            for (p, s) in [
                ([i, j, k], 1.0),
                ([j, k, i], 1.0),
                ([k, i, j], 1.0),
                ([j, i, k], -1.0),
                ([i, k, j], -1.0),
                ([k, j, i], -1.0),
            ] {
                t[p[0]][p[1]][p[2]] = s * c;
            }
        }
        t
    }

    /// Infinitesimal action `(A . phi)(x,y,z) = -phi(Ax,y,z) - phi(x,Ay,z) - phi(x,y,Az)`.
    pub fn act_algebra(&self, a: &DMatrix<f64>) -> DVector<f64> {
        let n = self.n;
        let t = self.dense();
        let mut out = DVector::zeros(component_count(n));
        for (idx, (i, j, k)) in triples(n).enumerate() {
            let mut s = 0.0;
            for m in 0..n {
                s += a[(m, i)] * t[m][j][k] + a[(m, j)] * t[i][m][k] + a[(m, k)] * t[i][j][m];
            }
            out[idx] = -s;
        }
        out
    }

    /// Group action `(g . phi)(x,y,z) = phi(g^{-1}x, g^{-1}y, g^{-1}z)` given `g^{-1}`.
    pub fn act_group_inv(&self, ginv: &DMatrix<f64>) -> ThreeForm {
        let n = self.n;
        let t = self.dense();
        let mut out = DVector::zeros(component_count(n));
        for (idx, (i, j, k)) in triples(n).enumerate() {
            let mut s = 0.0;
            for a in 0..n {
                let ga = ginv[(a, i)];
                if ga == 0.0 {
                    continue;
                }
                for b in 0..n {
                    let gb = ginv[(b, j)];
                    if gb == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        s += ga * gb * ginv[(c, k)] * t[a][b][c];
                    }
                }
            }
            out[idx] = s;
        }
        ThreeForm { n, coeffs: out }
    }

    /// Interior product `iota_x phi` as an antisymmetric matrix.
    pub fn contract(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let t = self.dense();
        DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| x[i] * t[i][j][k]).sum())
    }

    /// The symmetric bilinear form `B(x, y) vol = iota_x phi ^ iota_y phi ^ phi`
    /// on `R^7`, up to the positive factor fixed by the volume `e^{1..7}`.
    pub fn induced_metric(&self) -> Result<DMatrix<f64>> {
        if self.n != 7 {
            return Err(Error::DimensionError(format!(
                "induced metric needs a 3-form on R^7, got R^{}",
                self.n
            )));
        }
        let t = self.dense();
        let perms = permutations_with_sign(7);
        let mut b = DMatrix::zeros(7, 7);
        for x in 0..7 {
            for y in x..7 {
                let mut s = 0.0;
                for (p, sign) in &perms {
                    let first = t[x][p[0]][p[1]];
                    if first == 0.0 {
                        continue;
                    }
                    let second = t[y][p[2]][p[3]];
                    if second == 0.0 {
                        continue;
                    }
                    s += sign * first * second * t[p[4]][p[5]][p[6]];
                }
                b[(x, y)] = s;
                b[(y, x)] = s;
            }
        }
        Ok(b)
    }
}

/// All permutations of `0..n` with their signs (Heap's algorithm).
fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    let mut out = vec![(a.clone(), sign)];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Compact-type form `e123 + e145 + e167 + e246 - e257 - e347 - e356`.
pub fn compact_g2_form() -> ThreeForm {
    ThreeForm::parse_terms(7, &terms(&["123", "145", "167", "246", "-257", "-347", "-356"]))
        .expect("valid terms")
}

/// Split-type form `e123 - e145 - e167 - e246 + e257 + e347 + e356`, whose
/// induced metric is `diag(1,1,1,-1,-1,-1,-1)` up to scale.
pub fn split_g2_form() -> ThreeForm {
    ThreeForm::parse_terms(7, &terms(&["123", "-145", "-167", "-246", "257", "347", "356"]))
        .expect("valid terms")
}

fn terms(t: &[&str]) -> Vec<String> {
    t.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Form, SymmetricForm};

    #[test]
    fn heap_permutations_are_complete() {
        let p = permutations_with_sign(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p.iter().filter(|(_, s)| *s > 0.0).count(), 12);
    }

    #[test]
    fn antisymmetry_of_components() {
        let f = compact_g2_form();
        assert_eq!(f.get(0, 1, 2), 1.0);
        assert_eq!(f.get(1, 0, 2), -1.0);
        assert_eq!(f.get(4, 6, 1), -1.0);
        assert_eq!(f.get(2, 2, 5), 0.0);
    }

    #[test]
    fn compact_form_has_definite_metric() {
        let b = compact_g2_form().induced_metric().unwrap();
        let s = SymmetricForm::new(b).unwrap().signature();
        assert_eq!(s.null, 0);
        assert!(s.positive == 7 || s.negative == 7);
    }

    #[test]
    fn split_form_has_signature_3_4() {
        let b = split_g2_form().induced_metric().unwrap();
        let scale = b[(0, 0)];
        let normalized = &b / scale;
        let expect = crate::linalg::diag_pq(3, 4);
        assert!((normalized - expect).norm() < 1e-12);
    }

    #[test]
    fn group_action_matches_algebra_action() {
        let f = split_g2_form();
        let a = DMatrix::from_fn(7, 7, |i, k| ((3 * i + 5 * k) % 7) as f64 * 0.01 - 0.03);
        let eps = 1e-6;
        let ginv = crate::lie::expm(&(-&a * eps));
        let fd = (f.act_group_inv(&ginv).coeffs - &f.coeffs) / eps;
        assert!((fd - f.act_algebra(&a)).norm() < 1e-5);
    }
}
