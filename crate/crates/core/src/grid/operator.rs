use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{linspace, trapezoid_weights, weighted_norm, Grid1D};
use crate::error::{Error, Result};
use crate::symbol::CoefficientField;
use crate::wkb::Pseudomode;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Boundary condition at one endpoint. Robin reads `coef_deriv * h * f' + coef_value * f = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    Dirichlet,
    Robin { coef_deriv: Complex64, coef_value: Complex64 },
}

/// Matrix of `L_h` acting on the interior nodes of a uniform grid. Boundary values
/// are eliminated through the boundary conditions, so the state space is the
/// `m - 2` interior nodes with quadrature weight `spacing` each.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub grid: Grid1D,
    pub bc: (BoundaryCondition, BoundaryCondition),
    pub h: f64,
    pub name: String,
    /// Boundary value at each end as a combination of the two nearest interior nodes.
    closure: [(Complex64, Complex64); 2],
}

/// Fourth-order central weights for `f''` and `f'` on five points.
const D2_5: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D1_5: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

fn closure(bc: BoundaryCondition, h: f64, dx: f64, right: bool) -> Result<(Complex64, Complex64)> {
    match bc {
        BoundaryCondition::Dirichlet => Ok((ZERO, ZERO)),
        BoundaryCondition::Robin { coef_deriv, coef_value } => {
            if coef_deriv.norm() == 0.0 && coef_value.norm() == 0.0 {
                return Err(Error::Precondition("Robin coefficients are both zero".into()));
            }
            // one-sided f'(end) = (-3 f_e + 4 f_1 - f_2) / (2 dx), sign flipped on the right
            let k = coef_deriv * h / (2.0 * dx);
            let sign = if right { -1.0 } else { 1.0 };
            let denom = coef_value - k * (3.0 * sign);
            if denom.norm() <= 1e-14 * (coef_value.norm() + k.norm()) {
                return Err(Error::Degenerate("Robin row cannot be solved for the boundary value".into()));
            }
            Ok((-(k * (4.0 * sign)) / denom, (k * sign) / denom))
        }
    }
}

/// Dense matrix of `-h^2 a D2 - i h b D1 + c` with five-point stencils away from the
/// ends and three-point stencils on the rows next to them.
pub fn discretize(
    cf: &CoefficientField,
    h: f64,
    grid: Grid1D,
    bc: (BoundaryCondition, BoundaryCondition),
) -> Result<DenseOperator> {
    let m = grid.m;
    if m < Grid1D::MIN_POINTS {
        return Err(Error::Precondition(format!("grid too coarse: {m} points")));
    }
    cf.check(grid.x_lo)?;
    cf.check(grid.x_hi)?;
    let dx = grid.spacing();
    let x = grid.points();
    let left = closure(bc.0, h, dx, false)?;
    let right = closure(bc.1, h, dx, true)?;
    let dim = m - 2;
    let mut mat = DMatrix::from_element(dim, dim, ZERO);
    let ih = Complex64::new(0.0, h);
    let mut row = vec![ZERO; m];
    for i in 1..m - 1 {
        row.iter_mut().for_each(|v| *v = ZERO);
        let (a, b, c) = cf.values(x[i]);
        let p2 = -a * (h * h / (dx * dx));
        let p1 = -ih * b / dx;
        if i >= 2 && i + 2 < m {
            for k in 0..5 {
                row[i + k - 2] += p2 * D2_5[k] + p1 * D1_5[k];
            }
        } else {
            row[i - 1] += p2 - p1 * 0.5;
            row[i] += p2 * -2.0;
            row[i + 1] += p2 + p1 * 0.5;
        }
        row[i] += c;
        // fold the eliminated boundary values into the interior columns
        let w0 = row[0];
        row[1] += w0 * left.0;
        row[2] += w0 * left.1;
        let we = row[m - 1];
        row[m - 2] += we * right.0;
        row[m - 3] += we * right.1;
        for j in 1..m - 1 {
            mat[(i - 1, j - 1)] = row[j];
        }
    }
    Ok(DenseOperator {
        matrix: mat,
        grid,
        bc,
        h,
        name: cf.name.clone(),
        closure: [left, right],
    })
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Interior node abscissae (the state space).
    pub fn state_points(&self) -> Vec<f64> {
        let p = self.grid.points();
        p[1..p.len() - 1].to_vec()
    }

    /// Quadrature weights of the state space.
    pub fn weights(&self) -> Vec<f64> {
        vec![self.grid.spacing(); self.dim()]
    }

    /// Full nodal vector with boundary values restored from the boundary conditions.
    pub fn extend(&self, v: &DVector<Complex64>) -> Vec<Complex64> {
        let n = v.len();
        let mut out = Vec::with_capacity(n + 2);
        let [l, r] = self.closure;
        out.push(l.0 * v[0] + l.1 * v[1]);
        out.extend(v.iter().copied());
        out.push(r.0 * v[n - 1] + r.1 * v[n - 2]);
        out
    }

    /// Samples a mode on the interior nodes.
    pub fn sample(&self, mode: &Pseudomode) -> Result<DVector<Complex64>> {
        let pts = self.state_points();
        let mut v = DVector::from_element(pts.len(), ZERO);
        for (k, &x) in pts.iter().enumerate() {
            v[k] = mode.eval(x)?[0];
        }
        Ok(v)
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }

    pub fn norm_of(&self, v: &DVector<Complex64>) -> f64 {
        (v.norm_squared() * self.grid.spacing()).sqrt()
    }
}

/// `||L_h f - z f|| / ||f||` with `L_h f` from five-point stencils applied to the mode
/// resampled on `points` uniform nodes over its sampled span. The mode is treated as
/// zero outside that span.
pub fn stencil_residual(mode: &Pseudomode, cf: &CoefficientField, points: usize) -> Result<f64> {
    let (lo, hi) = mode.span();
    let x = linspace(lo, hi, points);
    let dx = x[1] - x[0];
    let f: Vec<Complex64> = x.iter().map(|&t| Ok(mode.eval(t)?[0])).collect::<Result<_>>()?;
    let at = |k: isize| -> Complex64 {
        if k < 0 || k as usize >= points {
            ZERO
        } else {
            f[k as usize]
        }
    };
    let h = mode.h;
    let mut r = Vec::with_capacity(points);
    for (k, &xk) in x.iter().enumerate() {
        let (a, b, c) = cf.values(xk);
        let mut d2 = ZERO;
        let mut d1 = ZERO;
        for j in 0..5 {
            let v = at(k as isize + j as isize - 2);
            d2 += v * D2_5[j];
            d1 += v * D1_5[j];
        }
        d2 /= dx * dx;
        d1 /= dx;
        r.push(-a * d2 * (h * h) - Complex64::new(0.0, h) * b * d1 + (c - mode.z) * f[k]);
    }
    let w = trapezoid_weights(&x);
    Ok(weighted_norm(&r, &w) / weighted_norm(&f, &w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::symbol::Polynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const DD: (BoundaryCondition, BoundaryCondition) = (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet);

    #[test]
    fn multiplication_operator_is_diagonal() {
        let cf = CoefficientField::new_unchecked(
            Arc::new(Polynomial::real(&[0.0])),
            Arc::new(Polynomial::real(&[0.0])),
            Arc::new(Polynomial::new(vec![c(2.0, -1.0)])),
            (0.0, 1.0),
        )
        .unwrap();
        let op = discretize(&cf, 0.1, Grid1D::new(0.0, 1.0, 20).unwrap(), DD).unwrap();
        assert_eq!(op.matrix, DMatrix::identity(18, 18) * c(2.0, -1.0));
    }

    #[test]
    fn plane_wave_symbol() {
        // interior rows act on exp(i w x) as h^2 w^2 up to O(dx^4 w^6)
        let cf = CoefficientField::polynomial(vec![1.0.into()], vec![0.0.into()], vec![0.0.into()], (0.0, 1.0))
            .unwrap();
        let (h, w) = (0.2, 3.0);
        for &m in &[41usize, 81] {
            let op = discretize(&cf, h, Grid1D::new(0.0, 1.0, m).unwrap(), DD).unwrap();
            let x = op.state_points();
            let v = DVector::from_iterator(x.len(), x.iter().map(|&t| c(0.0, w * t).exp()));
            let av = op.apply(&v);
            let dx = op.grid.spacing();
            for k in 2..x.len() - 2 {
                let ratio = av[k] / v[k];
                let err = (ratio - c(h * h * w * w, 0.0)).norm();
                assert!(err < 0.05 * h * h * dx.powi(4) * w.powi(6), "m={m} k={k} err={err:e}");
            }
        }
    }

    #[test]
    fn fourth_order_consistency() {
        let i = c(0.0, 1.0);
        let cf = CoefficientField::polynomial(
            vec![1.0.into(), 0.3.into()],
            vec![c(0.2, 0.1)],
            vec![0.0.into(), i],
            (-1.0, 1.0),
        )
        .unwrap();
        let h = 0.3;
        let f = |x: f64| (c(0.0, 2.0) * x).exp() * (-x * x).exp();
        let lf = |x: f64| {
            // analytic L_h of f = exp(2 i x - x^2)
            let g = c(0.0, 2.0) - 2.0 * x;
            let d1 = g * f(x);
            let d2 = (g * g - 2.0) * f(x);
            let (a, b, cc) = cf.values(x);
            -a * d2 * (h * h) - i * h * b * d1 + cc * f(x)
        };
        let mut errs = Vec::new();
        for &m in &[101usize, 201] {
            let op = discretize(&cf, h, Grid1D::new(-1.0, 1.0, m).unwrap(), DD).unwrap();
            let x = op.state_points();
            let v = DVector::from_iterator(x.len(), x.iter().map(|&t| f(t)));
            let av = op.apply(&v);
            let e = (2..x.len() - 2).map(|k| (av[k] - lf(x[k])).norm()).fold(0.0, f64::max);
            errs.push(e);
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 3.7, "observed order {rate}");
    }

    #[test]
    fn robin_closure_encodes_condition() {
        let cf = CoefficientField::complex_airy((-1.0, 1.0));
        let (cd, cv) = (c(1.0, 0.5), c(2.0, 0.0));
        let rb = BoundaryCondition::Robin { coef_deriv: cd, coef_value: cv };
        let h = 0.1;
        let op = discretize(&cf, h, Grid1D::new(-1.0, 1.0, 50).unwrap(), (rb, rb)).unwrap();
        let v = DVector::from_iterator(48, (0..48).map(|k| c((k as f64 * 0.3).sin(), 0.1 * k as f64)));
        let full = op.extend(&v);
        let dx = op.grid.spacing();
        let left = cd * h * (-3.0 * full[0] + 4.0 * full[1] - full[2]) / (2.0 * dx) + cv * full[0];
        let e = full.len() - 1;
        let right = cd * h * (3.0 * full[e] - 4.0 * full[e - 1] + full[e - 2]) / (2.0 * dx) + cv * full[e];
        assert!(left.norm() < 1e-13 && right.norm() < 1e-13);
        let zero = BoundaryCondition::Robin { coef_deriv: ZERO, coef_value: ZERO };
        assert!(discretize(&cf, h, Grid1D::new(-1.0, 1.0, 50).unwrap(), (zero, rb)).is_err());
    }

    #[test]
    fn coarse_grid_rejected() {
        let cf = CoefficientField::complex_airy((-1.0, 1.0));
        assert!(Grid1D::new(-1.0, 1.0, 5).is_err());
        let g = Grid1D { x_lo: -1.0, x_hi: 1.0, m: 5 };
        assert!(discretize(&cf, 0.1, g, DD).is_err());
    }
}
