//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries the value, gradient and Hessian of a scalar with respect
//! to the chart coordinates at one point. Arithmetic applies the chain rule
//! truncated at second order, so evaluating a closed-form metric on seeded
//! coordinate jets yields `g`, `dg` and `ddg` exactly up to rounding. This is
//! the nested-dual-number engine used for curvature.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest chart dimension supported by the jet engine.
pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; MAX_DIM],
    pub h: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, d: [0.0; MAX_DIM], h: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    /// Coordinate function `x_i` evaluated at `value`.
    pub fn variable(value: f64, i: usize) -> Self {
        let mut j = Jet::constant(value);
        j.d[i] = 1.0;
        j
    }

    /// Seeds the coordinate jets of a point.
    pub fn seed(x: &[f64]) -> Vec<Jet> {
        assert!(x.len() <= MAX_DIM, "chart dimension exceeds MAX_DIM");
        x.iter().enumerate().map(|(i, v)| Jet::variable(*v, i)).collect()
    }

    /// Builds a jet from explicit Taylor data (gradient and Hessian of length `n`).
    pub fn from_parts(v: f64, grad: &[f64], hess: &[Vec<f64>]) -> Self {
        let mut j = Jet::constant(v);
        for (i, g) in grad.iter().enumerate() {
            j.d[i] = *g;
        }
        for (i, row) in hess.iter().enumerate() {
            for (k, val) in row.iter().enumerate() {
                j.h[i][k] = *val;
            }
        }
        j
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(f0);
        for i in 0..MAX_DIM {
            out.d[i] = f1 * self.d[i];
            for k in 0..MAX_DIM {
                out.h[i][k] = f1 * self.h[i][k] + f2 * self.d[i] * self.d[k];
            }
        }
        out
    }

    pub fn grad(&self, n: usize) -> Vec<f64> {
        self.d[..n].to_vec()
    }

    pub fn hess(&self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| self.h[i][..n].to_vec()).collect()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for i in 0..MAX_DIM {
            self.d[i] += o.d[i];
            for k in 0..MAX_DIM {
                self.h[i][k] += o.h[i][k];
            }
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.v = -self.v;
        for i in 0..MAX_DIM {
            self.d[i] = -self.d[i];
            for k in 0..MAX_DIM {
                self.h[i][k] = -self.h[i][k];
            }
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..MAX_DIM {
            out.d[i] = self.v * o.d[i] + o.v * self.d[i];
            for k in 0..MAX_DIM {
                out.h[i][k] = self.v * o.h[i][k]
                    + o.v * self.h[i][k]
                    + self.d[i] * o.d[k]
                    + o.d[i] * self.d[k];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, c: f64) -> Jet {
        self.v *= c;
        for i in 0..MAX_DIM {
            self.d[i] *= c;
            for k in 0..MAX_DIM {
                self.h[i][k] *= c;
            }
        }
        self
    }
}

/// Scalars usable by closed-form metric and density expressions.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(c: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

impl Scalar for Jet {
    fn cst(c: f64) -> Self {
        Jet::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let u = self.v;
        self.chain(u.ln(), 1.0 / u, -1.0 / (u * u))
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }
    fn recip(self) -> Self {
        let u = self.v;
        self.chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))
    }
    fn powi(self, k: i32) -> Self {
        let u = self.v;
        let kf = k as f64;
        self.chain(
            u.powi(k),
            kf * u.powi(k - 1),
            kf * (kf - 1.0) * u.powi(k - 2),
        )
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<S: Scalar>(x: &[S]) -> S {
        // exp(x0 * x1) / (1 + x1^2) + sqrt(2 + x0)
        (x[0] * x[1]).exp() / (x[1] * x[1] + 1.0) + (x[0] + 2.0).sqrt()
    }

    #[test]
    fn jet_matches_central_differences() {
        let p = [0.3, -0.7];
        let j = f(&Jet::seed(&p));
        let h = 1e-4;
        for i in 0..2 {
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            let fd = (f(&a) - f(&b)) / (2.0 * h);
            assert!((fd - j.d[i]).abs() < 1e-7);
            for k in 0..2 {
                let eval = |di: f64, dk: f64| {
                    let mut q = p;
                    q[i] += di;
                    q[k] += dk;
                    f(&q)
                };
                let fd2 = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
                assert!((fd2 - j.h[i][k]).abs() < 1e-5, "{} {}", fd2, j.h[i][k]);
            }
        }
    }

    #[test]
    fn powi_and_recip_agree() {
        let x = Jet::variable(1.7, 0);
        let a = x.powi(-2);
        let b = (x * x).recip();
        assert!((a.v - b.v).abs() < 1e-15);
        assert!((a.d[0] - b.d[0]).abs() < 1e-14);
        assert!((a.h[0][0] - b.h[0][0]).abs() < 1e-13);
    }
}
