//! Matrix exponential and principal logarithm.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Scaling and squaring with a Taylor kernel on `||A / 2^s||_1 <= 1/2`.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square());
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > 0.5 { (nrm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a / 2f64.powi(s);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..40 {
        term = &term * &b / k as f64;
        sum += &term;
        if norm1(&term) <= f64::EPSILON * 1e-2 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Principal square root by the Denman-Beavers iteration.
fn sqrtm(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let mut y = t.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..100 {
        let yi = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalError("singular iterate in sqrtm".into()))?;
        let zi = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalError("singular iterate in sqrtm".into()))?;
        let y_next = (&y + zi) * 0.5;
        let z_next = (&z + yi) * 0.5;
        let delta = (&y_next - &y).norm() / y_next.norm().max(1.0);
        y = y_next;
        z = z_next;
        if delta < 1e-15 {
            return Ok(y);
        }
    }
    Err(Error::NoConvergence("Denman-Beavers square root".into()))
}

/// Principal logarithm by inverse scaling and squaring.
pub fn logm(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert!(t.is_square());
    let n = t.nrows();
    let id = DMatrix::identity(n, n);
    let mut m = t.clone();
    let mut k = 0;
    while norm1(&(&m - &id)) > 0.25 {
        m = sqrtm(&m)?;
        k += 1;
        if k > 60 {
            return Err(Error::NoConvergence("logm square-root ladder".into()));
        }
    }
    // log(M) = 2 atanh(Z), Z = (M - I)(M + I)^{-1}.
    let inv = (&m + &id)
        .try_inverse()
        .ok_or_else(|| Error::NumericalError("M + I singular".into()))?;
    let z = (&m - &id) * inv;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for j in 1..60 {
        term = &term * &z2;
        let add = &term / (2 * j + 1) as f64;
        sum += &add;
        if norm1(&add) <= f64::EPSILON * 1e-2 * norm1(&sum).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(sum * (2.0 * 2f64.powi(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(expm(&DMatrix::zeros(4, 4)), DMatrix::identity(4, 4));
    }

    #[test]
    fn exp_of_rotation_by_pi() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -PI, PI, 0.0]);
        assert!((expm(&a) + DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn exp_of_nilpotent_shift() {
        let n = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let expect = DMatrix::identity(3, 3) + &n + &n * &n * 0.5;
        assert!((expm(&n) - expect).norm() < 1e-15);
    }

    #[test]
    fn agrees_with_nalgebra_pade() {
        let a = DMatrix::from_fn(5, 5, |i, k| ((i * 7 + k * 3) % 11) as f64 / 4.0 - 1.2);
        let ours = expm(&a);
        let theirs = a.clone().exp();
        assert!((&ours - &theirs).norm() / theirs.norm() < 1e-13);
    }

    #[test]
    fn log_inverts_exp() {
        let a = DMatrix::from_fn(4, 4, |i, k| (((i + 2 * k) % 5) as f64 - 2.0) * 0.3);
        let back = logm(&expm(&a)).unwrap();
        assert!((back - a).norm() < 1e-12);
    }
}
