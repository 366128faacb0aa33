use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference propagator for `exp(t A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// Scaling and squaring with Pade approximants of the full matrix exponential.
    Exponential,
    /// Implicit fourth-order stepping with step doubling until successive results agree.
    Implicit,
}

/// Dimension up to which [`propagate`] uses the dense exponential.
const DENSE_LIMIT: usize = 400;
const IMPLICIT_TOL: f64 = 1e-12;

fn check(a: &DMatrix<Complex64>, t: f64) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), actual: a.ncols() });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("evolution time must be finite and nonnegative, got {t}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("operator matrix has nonfinite entries".into()));
    }
    Ok(())
}

/// `exp(t A)` as a dense matrix.
pub fn propagator(a: &DMatrix<Complex64>, t: f64) -> Result<DMatrix<Complex64>> {
    check(a, t)?;
    if t == 0.0 {
        return Ok(DMatrix::identity(a.nrows(), a.ncols()));
    }
    let e = (a * Complex64::new(t, 0.0)).exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(e)
}

/// `exp(t A) f`, choosing the dense exponential for small matrices.
pub fn propagate(a: &DMatrix<Complex64>, f: &DVector<Complex64>, t: f64) -> Result<DVector<Complex64>> {
    let method = if a.nrows() <= DENSE_LIMIT { Propagation::Exponential } else { Propagation::Implicit };
    propagate_with(a, f, t, method)
}

pub fn propagate_with(
    a: &DMatrix<Complex64>,
    f: &DVector<Complex64>,
    t: f64,
    method: Propagation,
) -> Result<DVector<Complex64>> {
    check(a, t)?;
    if f.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), actual: f.len() });
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    match method {
        Propagation::Exponential => Ok(propagator(a, t)? * f),
        Propagation::Implicit => implicit(a, f, t),
    }
}

/// Fourth-order rational stepping `r(z) = (1 + z/2 + z^2/12) / (1 - z/2 + z^2/12)`, with
/// the denominator split into the linear factors at `z = 3 +- i sqrt(3)`.
fn implicit(a: &DMatrix<Complex64>, f: &DVector<Complex64>, t: f64) -> Result<DVector<Complex64>> {
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max) * a.nrows() as f64;
    let mut steps = ((t * scale).ceil() as usize).clamp(1, 1 << 14);
    let mut prev = run_steps(a, f, t, steps)?;
    let fnorm = f.norm().max(f64::MIN_POSITIVE);
    for _ in 0..12 {
        steps *= 2;
        let next = run_steps(a, f, t, steps)?;
        let diff = (&next - &prev).norm();
        if diff <= IMPLICIT_TOL * fnorm.max(next.norm()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numeric("implicit propagation did not converge under step doubling".into()))
}

fn run_steps(a: &DMatrix<Complex64>, f: &DVector<Complex64>, t: f64, steps: usize) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    let tau = Complex64::new(t / steps as f64, 0.0);
    let ta = a * tau;
    let ta2 = &ta * &ta;
    let id = DMatrix::<Complex64>::identity(n, n);
    let numer = &id + &ta * Complex64::new(0.5, 0.0) + &ta2 * Complex64::new(1.0 / 12.0, 0.0);
    let r1 = Complex64::new(3.0, 3f64.sqrt());
    let r2 = r1.conj();
    let lu1 = (&id - &ta / r1).lu();
    let lu2 = (&id - &ta / r2).lu();
    let mut y = f.clone();
    for _ in 0..steps {
        let w = &numer * &y;
        let w = lu1.solve(&w).ok_or_else(|| Error::Numeric("singular implicit step".into()))?;
        y = lu2.solve(&w).ok_or_else(|| Error::Numeric("singular implicit step".into()))?;
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("implicit propagation produced nonfinite values".into()));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{discretize, BoundaryCondition, Grid1D};
    use crate::symbol::CoefficientField;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn airy_generator(m: usize) -> DMatrix<Complex64> {
        let cf = CoefficientField::complex_airy((-1.0, 1.0));
        let bc = (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet);
        -discretize(&cf, 0.1, Grid1D::new(-1.0, 1.0, m).unwrap(), bc).unwrap().matrix
    }

    fn probe(n: usize) -> DVector<Complex64> {
        DVector::from_iterator(n, (0..n).map(|k| c((k as f64 * 0.3).sin(), (k as f64 * 0.17).cos())))
    }

    #[test]
    fn zero_time_is_identity() {
        let a = airy_generator(30);
        let f = probe(28);
        assert_eq!(propagate(&a, &f, 0.0).unwrap(), f);
        assert!(propagate(&a, &f, -1.0).is_err());
    }

    #[test]
    fn diagonal_generator() {
        let lam = [c(-1.0, 2.0), c(0.3, 0.0), c(-0.2, -1.0)];
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&lam));
        let f = DVector::from_row_slice(&[c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)]);
        for method in [Propagation::Exponential, Propagation::Implicit] {
            let y = propagate_with(&a, &f, 0.7, method).unwrap();
            for k in 0..3 {
                let expect = f[k] * (lam[k] * 0.7).exp();
                assert!((y[k] - expect).norm() < 1e-11, "{method:?}");
            }
        }
    }

    #[test]
    fn methods_agree_and_flow_composes() {
        let a = airy_generator(40);
        let f = probe(38);
        let e = propagate_with(&a, &f, 0.8, Propagation::Exponential).unwrap();
        let i = propagate_with(&a, &f, 0.8, Propagation::Implicit).unwrap();
        assert!((&e - &i).norm() < 1e-8 * f.norm());
        let half = propagate(&a, &f, 0.3).unwrap();
        let both = propagate(&a, &half, 0.5).unwrap();
        assert!((&both - &e).norm() < 1e-8 * f.norm());
    }
}
