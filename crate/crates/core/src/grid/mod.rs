//! Discretization and measurement: uniform grids, dense operator matrices, residual
//! triples, convergence-order fits, resolvent maps and reference propagators.

mod operator;
mod propagate;
mod residual;
mod resolvent;

pub use operator::{discretize, stencil_residual, BoundaryCondition, DenseOperator};
pub use propagate::{propagate, propagate_with, propagator, Propagation};
pub use residual::{residual_triple, ResidualTriple};
pub use resolvent::{
    resolvent_map, smallest_singular_value, write_resolvent_csv, ResolventCell, MAX_ITERATIONS,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default semiclassical sweep `h = 2^-4, ..., 2^-9`.
pub fn default_h_sweep() -> Vec<f64> {
    (4..=9).map(|k| 2f64.powi(-k)).collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|k| a + step * k as f64).collect();
            v[n - 1] = b;
            v
        }
    }
}

/// Trapezoid weights for arbitrary increasing abscissae.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let left = if k > 0 { x[k] - x[k - 1] } else { 0.0 };
            let right = if k + 1 < n { x[k + 1] - x[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `sqrt(sum_k w_k |f_k|^2)`, summed in index order.
pub fn weighted_norm(f: &[Complex64], w: &[f64]) -> f64 {
    f.iter()
        .zip(w)
        .map(|(v, w)| v.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// `sum_k w_k conj(f_k) g_k`.
pub fn weighted_inner(f: &[Complex64], g: &[Complex64], w: &[f64]) -> Complex64 {
    f.iter().zip(g).zip(w).map(|((a, b), w)| a.conj() * b * *w).sum()
}

/// Uniform grid on `[x_lo, x_hi]` with trapezoid weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub m: usize,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(x_lo: f64, x_hi: f64, m: usize) -> Result<Self> {
        if m < Self::MIN_POINTS {
            return Err(Error::Precondition(format!(
                "grid needs at least {} points, got {m}",
                Self::MIN_POINTS
            )));
        }
        if !(x_lo.is_finite() && x_hi.is_finite() && x_lo < x_hi) {
            return Err(Error::Precondition(format!("invalid grid interval [{x_lo}, {x_hi}]")));
        }
        Ok(Grid1D { x_lo, x_hi, m })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.m - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        linspace(self.x_lo, self.x_hi, self.m)
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.points())
    }
}

/// Least-squares line through `(log h, log r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn order_fit(h: &[f64], r: &[f64]) -> Result<OrderFit> {
    if h.len() != r.len() {
        return Err(Error::DimensionMismatch { expected: h.len(), actual: r.len() });
    }
    if h.iter().chain(r).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Precondition("order fit needs positive finite data".into()));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    linear_fit(&x, &y)
}

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<OrderFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < 4 {
        return Err(Error::Precondition(format!("fit needs at least 4 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Precondition("fit needs finite data".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { ((sxy * sxy) / (sxx * syy)).min(1.0) };
    Ok(OrderFit { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn grid_weights_sum_to_length() {
        let g = Grid1D::new(-1.0, 2.0, 31).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 3.0).abs() < 1e-14);
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert!(Grid1D::new(0.0, 1.0, 7).is_err());
    }

    #[test]
    fn fits_recover_exponents() {
        let h = default_h_sweep();
        let r: Vec<f64> = h.iter().map(|v| v * v).collect();
        let f = order_fit(&h, &r).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let r: Vec<f64> = h.iter().map(|v| 3.0 * v.sqrt()).collect();
        let f = order_fit(&h, &r).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let r: Vec<f64> = h.iter().map(|v| v.powi(3) * (1.0 + 0.01 * rng.random::<f64>())).collect();
        let f = order_fit(&h, &r).unwrap();
        assert!(f.slope > 2.9 && f.slope < 3.1);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(order_fit(&[1.0, 0.5, 0.25], &[1.0, 1.0, 1.0]).is_err());
        assert!(order_fit(&[1.0, 0.5, 0.25, 0.1], &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(order_fit(&[1.0, 0.5, 0.25, 0.1], &[1.0, 1.0]).is_err());
    }
}
