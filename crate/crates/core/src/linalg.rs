//! Dense helpers for quadrature-weighted norms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Multiplies row `k` by `s[k]`.
pub fn scale_rows(m: &DMatrix<Complex64>, s: &[f64]) -> DMatrix<Complex64> {
    let mut out = m.clone();
    for (k, mut row) in out.row_iter_mut().enumerate() {
        row *= Complex64::new(s[k], 0.0);
    }
    out
}

/// Multiplies column `k` by `s[k]`.
pub fn scale_cols(m: &DMatrix<Complex64>, s: &[f64]) -> DMatrix<Complex64> {
    let mut out = m.clone();
    for (k, mut col) in out.column_iter_mut().enumerate() {
        col *= Complex64::new(s[k], 0.0);
    }
    out
}

pub fn sqrt_all(w: &[f64]) -> Vec<f64> {
    w.iter().map(|v| v.sqrt()).collect()
}

pub fn inv_sqrt_all(w: &[f64]) -> Vec<f64> {
    w.iter().map(|v| 1.0 / v.sqrt()).collect()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Norm of `m` from `L^2(w_in)` to `L^2(w_out)`; `None` means unweighted.
pub fn weighted_operator_norm(m: &DMatrix<Complex64>, w_in: Option<&[f64]>, w_out: Option<&[f64]>) -> f64 {
    let mut x = m.clone();
    if let Some(w) = w_out {
        x = scale_rows(&x, &sqrt_all(w));
    }
    if let Some(w) = w_in {
        x = scale_cols(&x, &inv_sqrt_all(w));
    }
    spectral_norm(&x)
}

/// `W^{1/2} m W^{-1/2}`: the matrix of `m` in an orthonormal basis of `L^2(w)`.
pub fn similarity(m: &DMatrix<Complex64>, w: &[f64]) -> Result<DMatrix<Complex64>> {
    if !m.is_square() || m.nrows() != w.len() {
        return Err(Error::DimensionMismatch { expected: w.len(), actual: m.nrows() });
    }
    Ok(scale_cols(&scale_rows(m, &sqrt_all(w)), &inv_sqrt_all(w)))
}

/// Eigenvalues of the Hermitian part `(B + B^H) / 2`, ascending.
pub fn hermitian_part_eigenvalues(b: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
