use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::weighted_norm;
use crate::error::{Error, Result};
use crate::symbol::CoefficientField;
use crate::wkb::{ModeKind, Pseudomode};

/// Relative residuals of a mode: position `rQ`, momentum `rP`, operator `rL`, and `||f||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualTriple {
    pub r_q: f64,
    pub r_p: f64,
    pub r_l: f64,
    pub norm: f64,
}

/// Residuals computed from the analytic samples `f, f', f''`.
///
/// Boundary modes are anchored at `x = 0`, so their position residual is `||x f|| / ||f||`.
pub fn residual_triple(mode: &Pseudomode, cf: &CoefficientField) -> Result<ResidualTriple> {
    let n = mode.grid.len();
    if mode.f.len() != n || mode.df.len() != n || mode.d2f.len() != n {
        return Err(Error::Precondition("mode is missing derivative samples".into()));
    }
    let w = mode.weights();
    let norm = weighted_norm(&mode.f, &w);
    if !(norm > 0.0) {
        return Err(Error::Numeric("mode has zero norm".into()));
    }
    let anchor = if mode.kind == ModeKind::Boundary { 0.0 } else { mode.u };
    let h = mode.h;
    let ih = Complex64::new(0.0, h);
    let mut q = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n);
    for k in 0..n {
        let x = mode.grid[k];
        let (f, d1, d2) = (mode.f[k], mode.df[k], mode.d2f[k]);
        let (a, b, c) = cf.values(x);
        q.push(f * (x - anchor));
        p.push(-ih * d1 - mode.xi * f);
        l.push(-a * d2 * (h * h) - ih * b * d1 + (c - mode.z) * f);
    }
    Ok(ResidualTriple {
        r_q: weighted_norm(&q, &w) / norm,
        r_p: weighted_norm(&p, &w) / norm,
        r_l: weighted_norm(&l, &w) / norm,
        norm,
    })
}
