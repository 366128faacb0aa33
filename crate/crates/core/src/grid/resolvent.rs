use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DenseOperator;
use crate::error::Result;

/// Iteration cap for the smallest-singular-value solve; cells hitting it are flagged.
pub const MAX_ITERATIONS: usize = 500;
const STAGNATION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventCell {
    pub z: Complex64,
    pub s_min: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Block size of the subspace iteration.
const BLOCK: usize = 6;

/// Smallest singular value of a square matrix by block inverse iteration on `B^H B`,
/// using LU factors of `B` and `B^H` with a Rayleigh-Ritz step on each sweep. Returns
/// `(s_min, iterations, converged)`.
pub fn smallest_singular_value(b: &DMatrix<Complex64>) -> (f64, usize, bool) {
    let n = b.nrows();
    if n == 0 {
        return (0.0, 0, true);
    }
    let p = BLOCK.min(n);
    let lu = b.clone().lu();
    let lu_h = b.adjoint().lu();
    // fixed start so results do not depend on thread scheduling
    let mut x = DMatrix::from_fn(n, p, |k, j| {
        let t = (k * (j + 1)) as f64;
        Complex64::new((0.731 * t + j as f64).sin() + 0.1, 0.21 * (1.37 * t).cos())
    });
    x = x.qr().q();
    let mut prev = f64::INFINITY;
    let mut s = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let Some(y) = lu_h.solve(&x) else { return (0.0, it, true) };
        let Some(v) = lu.solve(&y) else { return (0.0, it, true) };
        if v.iter().any(|c| !c.is_finite()) {
            return (0.0, it, true);
        }
        let q = v.qr().q();
        let svd = (b * &q).svd(false, true);
        let Some(vt) = svd.v_t else { return (s, it, false) };
        let order = {
            let mut idx: Vec<usize> = (0..p).collect();
            idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
            idx
        };
        s = svd.singular_values[order[0]];
        let vt_sorted = DMatrix::from_fn(p, p, |i, j| vt[(order[j], i)].conj());
        x = &q * vt_sorted;
        if (s - prev).abs() <= STAGNATION * s.max(f64::MIN_POSITIVE) {
            return (s, it, true);
        }
        prev = s;
    }
    (s, MAX_ITERATIONS, false)
}

/// `s_min(A - z)` in the quadrature-weighted norm for every `z`, evaluated in parallel.
///
/// The state space carries equal weights, so the weighted and Euclidean singular values
/// coincide.
pub fn resolvent_map(op: &DenseOperator, z_grid: &[Complex64]) -> Vec<ResolventCell> {
    z_grid
        .par_iter()
        .map(|&z| {
            let mut b = op.matrix.clone();
            for k in 0..b.nrows() {
                b[(k, k)] -= z;
            }
            let (s_min, iterations, converged) = smallest_singular_value(&b);
            ResolventCell { z, s_min, iterations, converged }
        })
        .collect()
}

/// Writes `re_z, im_z, s_min` rows.
pub fn write_resolvent_csv<W: Write>(cells: &[ResolventCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re_z", "im_z", "s_min"])?;
    for c in cells {
        w.write_record([c.z.re.to_string(), c.z.im.to_string(), c.s_min.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
