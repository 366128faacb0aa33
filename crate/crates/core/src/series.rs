//! Truncated power series over the complex numbers.
//!
//! A [`Series`] holds the Taylor coefficients `c[0] + c[1] t + ... + c[N] t^N` of an
//! analytic function about some expansion point. Products, quotients, roots and
//! logarithms are computed exactly to the retained degree; binary operations
//! truncate to the shorter operand.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    coeffs: Vec<Complex64>,
}

impl Series {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Series { coeffs }
    }

    pub fn zeros(len: usize) -> Self {
        Series::from_coeffs(vec![ZERO; len])
    }

    pub fn constant(value: Complex64, len: usize) -> Self {
        let mut s = Series::zeros(len);
        s.coeffs[0] = value;
        s
    }

    /// The identity series `t`.
    pub fn variable(len: usize) -> Self {
        let mut s = Series::zeros(len);
        if len > 1 {
            s.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest retained degree.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(ZERO)
    }

    pub fn set_coeff(&mut self, j: usize, value: Complex64) {
        self.coeffs[j] = value;
    }

    pub fn truncate(&self, len: usize) -> Series {
        let len = len.min(self.len()).max(1);
        Series::from_coeffs(self.coeffs[..len].to_vec())
    }

    pub fn scale(&self, k: Complex64) -> Series {
        Series::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Horner evaluation at `t`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    /// Horner evaluation at complex `t`.
    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    /// Term-by-term derivative; one coefficient shorter.
    pub fn derivative(&self) -> Series {
        if self.len() == 1 {
            return Series::zeros(1);
        }
        Series::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        )
    }

    /// Antiderivative with the given constant term; one coefficient longer.
    pub fn integrate(&self, constant: Complex64) -> Series {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(constant);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c / (j as f64 + 1.0)),
        );
        Series::from_coeffs(out)
    }

    /// Reciprocal `1 / self`.
    pub fn recip(&self) -> Result<Series> {
        Series::constant(Complex64::new(1.0, 0.0), self.len()).div(self)
    }

    /// Quotient `self / den`, truncated to the shorter length.
    pub fn div(&self, den: &Series) -> Result<Series> {
        let d0 = den.coeffs[0];
        if d0.norm() == 0.0 {
            return Err(Error::Numeric(
                "series division by a series with zero constant term".into(),
            ));
        }
        let len = self.len().min(den.len());
        let mut q = vec![ZERO; len];
        for k in 0..len {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= den.coeffs[j] * q[k - j];
            }
            q[k] = acc / d0;
        }
        Ok(Series::from_coeffs(q))
    }

    /// Square root whose constant term is pinned to `root0` (which must square to
    /// the constant term up to rounding).
    pub fn sqrt_with_root(&self, root0: Complex64) -> Result<Series> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 || root0.norm() == 0.0 {
            return Err(Error::Numeric("series square root at a branch point".into()));
        }
        let mismatch = (root0 * root0 - c0).norm() / c0.norm();
        if mismatch > 1e-8 {
            return Err(Error::Numeric(format!(
                "pinned root does not square to the constant term (relative mismatch {mismatch:e})"
            )));
        }
        let len = self.len();
        let mut r = vec![ZERO; len];
        r[0] = root0;
        let two_r0 = root0 * 2.0;
        for k in 1..len {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= r[j] * r[k - j];
            }
            r[k] = acc / two_r0;
        }
        Ok(Series::from_coeffs(r))
    }

    /// Principal-branch square root of the constant term.
    pub fn sqrt(&self) -> Result<Series> {
        self.sqrt_with_root(self.coeffs[0].sqrt())
    }

    /// Logarithm with the principal branch at the constant term.
    pub fn ln(&self) -> Result<Series> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 {
            return Err(Error::Numeric("logarithm of a series vanishing at 0".into()));
        }
        let quotient = self.derivative().div(&self.truncate(self.len() - 1))?;
        Ok(quotient.integrate(c0.ln()).truncate(self.len()))
    }

    pub fn exp(&self) -> Series {
        let len = self.len();
        let mut e = vec![ZERO; len];
        e[0] = self.coeffs[0].exp();
        // e' = a' e  =>  k e_k = sum_{j=1..k} j a_j e_{k-j}
        for k in 1..len {
            let mut acc = ZERO;
            for j in 1..=k {
                acc += self.coeffs[j] * e[k - j] * j as f64;
            }
            e[k] = acc / k as f64;
        }
        Series::from_coeffs(e)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Upper estimate of `sum_{j >= len-tail} |c_j| r^j`, the contribution of the highest
    /// retained coefficients at radius `r`.
    pub fn tail_at(&self, r: f64, tail: usize) -> f64 {
        let n = self.len();
        let start = n.saturating_sub(tail.max(1));
        (start..n).map(|j| self.coeffs[j].norm() * r.powi(j as i32)).sum()
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let len = self.len().min(rhs.len());
        Series::from_coeffs((0..len).map(|j| self.coeffs[j] + rhs.coeffs[j]).collect())
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let len = self.len().min(rhs.len());
        Series::from_coeffs((0..len).map(|j| self.coeffs[j] - rhs.coeffs[j]).collect())
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let len = self.len().min(rhs.len());
        let mut out = vec![ZERO; len];
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(len - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Series::from_coeffs(out)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Add<Complex64> for &Series {
    type Output = Series;
    fn add(self, rhs: Complex64) -> Series {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn geometric_reciprocal() {
        let one_minus_t = Series::from_coeffs(vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let r = one_minus_t.recip().unwrap();
        for k in 0..5 {
            assert_relative_eq!(r.coeff(k).re, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sqrt_squares_back_and_respects_pinned_branch() {
        let w = Series::from_coeffs(vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let r = w.sqrt_with_root(c(-1.0, 0.0)).unwrap();
        assert_eq!(r.coeff(0), c(-1.0, 0.0));
        let sq = &r * &r;
        for k in 0..6 {
            assert!((sq.coeff(k) - w.coeff(k)).norm() < 1e-15);
        }
        assert!(w.sqrt_with_root(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn ln_and_exp_invert() {
        let f = Series::from_coeffs(vec![c(2.0, 1.0), c(0.3, -0.2), c(0.1, 0.0), c(0.0, 0.5), c(-0.2, 0.1)]);
        let back = f.ln().unwrap().truncate(5).exp();
        for k in 0..5 {
            assert!((back.coeff(k) - f.coeff(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn ln_one_plus_t() {
        let f = Series::from_coeffs(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let l = f.ln().unwrap();
        let expect = [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25];
        for (k, e) in expect.iter().enumerate() {
            assert_relative_eq!(l.coeff(k).re, *e, epsilon = 1e-15);
        }
    }

    #[test]
    fn integrate_then_differentiate() {
        let f = Series::from_coeffs(vec![c(1.0, 2.0), c(3.0, 0.0), c(0.0, -4.0)]);
        let back = f.integrate(c(7.0, 0.0)).derivative();
        assert_eq!(back, f);
    }

    #[test]
    fn division_by_zero_constant_fails() {
        let z = Series::from_coeffs(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(Series::constant(c(1.0, 0.0), 2).div(&z).is_err());
    }
}
