//! Finite frames of pseudomodes and the approximate spectral calculus built on them:
//! defects, semigroup error bounds, regularized inverses, reconstruction, approximate
//! evolution, pseudospectral inclusion and quantization.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{propagator, smallest_singular_value, weighted_norm, DenseOperator};
use crate::linalg::{
    hermitian_part_eigenvalues, scale_cols, scale_rows, similarity, sqrt_all,
    weighted_operator_norm,
};
use crate::wkb::{ModeKind, Pseudomode};

/// Default regularization parameter.
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Condition numbers of `E* E + delta` above this are reported as unreliable.
pub const CONDITION_WARNING: f64 = 1e12;
/// Relative allowance for the reference propagator in bound checks.
pub const REFERENCE_SLACK: f64 = 0.05;

/// Where a frame column came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub kind: ModeKind,
    pub u: f64,
    pub xi: Complex64,
    pub h: f64,
    pub n: usize,
}

/// Unit-norm columns `e_n` on a common weighted grid, with values `Lambda_n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameMatrix {
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub e: DMatrix<Complex64>,
    pub lambda: DVector<Complex64>,
    pub provenance: Vec<Option<ColumnInfo>>,
}

impl FrameMatrix {
    /// Normalizes the given columns in the weighted norm.
    pub fn from_columns(
        grid: Vec<f64>,
        weights: Vec<f64>,
        columns: Vec<Vec<Complex64>>,
        lambda: Vec<Complex64>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Precondition("a frame needs at least one column".into()));
        }
        if weights.len() != grid.len() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Precondition("frame weights must be positive, one per grid point".into()));
        }
        if lambda.len() != columns.len() {
            return Err(Error::DimensionMismatch { expected: columns.len(), actual: lambda.len() });
        }
        let rows = grid.len();
        let mut e = DMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, actual: col.len() });
            }
            let nrm = weighted_norm(col, &weights);
            if !(nrm > 0.0) || !nrm.is_finite() {
                return Err(Error::Numeric(format!("frame column {j} has norm {nrm}")));
            }
            for (k, v) in col.iter().enumerate() {
                e[(k, j)] = v / nrm;
            }
        }
        let provenance = vec![None; columns.len()];
        Ok(FrameMatrix { grid, weights, e, lambda: DVector::from_vec(lambda), provenance })
    }

    pub fn columns(&self) -> usize {
        self.e.ncols()
    }

    /// The same columns with every `Lambda_n` replaced by `f(Lambda_n)`.
    pub fn map_lambda(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        out.lambda.apply(|v| *v = f(*v));
        out
    }

    /// Weighted adjoint `E* = E^H W`.
    pub fn adjoint(&self) -> DMatrix<Complex64> {
        scale_cols(&self.e.adjoint(), &self.weights)
    }

    /// Gram matrix `E* E`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        self.adjoint() * &self.e
    }

    /// `E phi` as grid samples.
    pub fn synthesize(&self, phi: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if phi.len() != self.columns() {
            return Err(Error::DimensionMismatch { expected: self.columns(), actual: phi.len() });
        }
        Ok(&self.e * phi)
    }

    /// Weighted norm of grid samples.
    pub fn norm_of(&self, f: &DVector<Complex64>) -> f64 {
        weighted_norm(f.as_slice(), &self.weights)
    }

    /// Norm of `E` as a map from `l^2` coefficients into the weighted space.
    pub fn synthesis_norm(&self) -> f64 {
        weighted_operator_norm(&self.e, None, Some(&self.weights))
    }

    /// Singular values of `W^{1/2} E`, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = scale_rows(&self.e, &sqrt_all(&self.weights)).singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Ratio of extreme singular values of `W^{1/2} E`; infinite when rank deficient.
    pub fn condition_number(&self) -> f64 {
        let s = self.singular_values();
        let hi = s[0];
        let lo = *s.last().unwrap();
        if lo <= hi * f64::EPSILON * s.len() as f64 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    fn check_operator(&self, a: &DMatrix<Complex64>) -> Result<()> {
        if a.nrows() != self.grid.len() || a.ncols() != self.grid.len() {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), actual: a.nrows() });
        }
        Ok(())
    }
}

/// Samples every mode on `grid` and normalizes; `Lambda_n` is the mode's `z`.
pub fn build_frame(modes: &[Pseudomode], grid: &[f64], weights: &[f64]) -> Result<FrameMatrix> {
    if modes.is_empty() {
        return Err(Error::Precondition("a frame needs at least one mode".into()));
    }
    let columns: Vec<Vec<Complex64>> = modes
        .par_iter()
        .map(|m| grid.iter().map(|&x| Ok(m.eval(x)?[0])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let lambda = modes.iter().map(|m| m.z).collect();
    let mut frame = FrameMatrix::from_columns(grid.to_vec(), weights.to_vec(), columns, lambda)?;
    frame.provenance = modes
        .iter()
        .map(|m| Some(ColumnInfo { kind: m.kind, u: m.u, xi: m.xi, h: m.h, n: m.n }))
        .collect();
    Ok(frame)
}

/// Frame on the state space of a discretized operator.
pub fn build_frame_on(op: &DenseOperator, modes: &[Pseudomode]) -> Result<FrameMatrix> {
    build_frame(modes, &op.state_points(), &op.weights())
}

/// `A E - E Lambda`.
pub fn defect_matrix(a: &DMatrix<Complex64>, frame: &FrameMatrix) -> Result<DMatrix<Complex64>> {
    frame.check_operator(a)?;
    let mut el = frame.e.clone();
    for (j, mut col) in el.column_iter_mut().enumerate() {
        col *= frame.lambda[j];
    }
    Ok(a * &frame.e - el)
}

/// `||A E - E Lambda||` from `l^2` coefficients into the weighted space.
pub fn defect(a: &DMatrix<Complex64>, frame: &FrameMatrix) -> Result<f64> {
    let d = defect_matrix(a, frame)?;
    Ok(weighted_operator_norm(&d, None, Some(&frame.weights)))
}

/// `||A e_n - Lambda_n e_n||` per column.
pub fn column_residuals(a: &DMatrix<Complex64>, frame: &FrameMatrix) -> Result<Vec<f64>> {
    let d = defect_matrix(a, frame)?;
    Ok(d.column_iter()
        .map(|c| weighted_norm(c.as_slice(), &frame.weights))
        .collect())
}

/// Defect measured from `l^1` coefficients, which is the largest column residual.
pub fn synthesis_defect(a: &DMatrix<Complex64>, frame: &FrameMatrix) -> Result<f64> {
    Ok(column_residuals(a, frame)?.into_iter().fold(0.0, f64::max))
}

/// Constants with `||exp(t A)|| <= M exp(gamma t)`, and the measured defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionBound {
    pub m: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

/// `M = 1` and `gamma` the larger of the numerical abscissa of `A` in the weighted norm
/// and `max Re Lambda_n`.
pub fn evolution_bound(a: &DMatrix<Complex64>, frame: &FrameMatrix) -> Result<EvolutionBound> {
    frame.check_operator(a)?;
    let b = similarity(a, &frame.weights)?;
    let omega = *hermitian_part_eigenvalues(&b).last().unwrap();
    let re_max = frame.lambda.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(EvolutionBound { m: 1.0, gamma: omega.max(re_max), epsilon: defect(a, frame)? })
}

/// The generator `-L_h` of the evolution `exp(-t L_h)` for a discretized operator.
pub fn generator(op: &DenseOperator) -> DMatrix<Complex64> {
    -op.matrix.clone()
}

/// One row of a bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub t: f64,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

fn check_hypothesis(frame: &FrameMatrix, bound: &EvolutionBound) -> Result<()> {
    if !(bound.m >= 1.0) {
        return Err(Error::Precondition(format!("semigroup constant M = {} is below 1", bound.m)));
    }
    for (n, l) in frame.lambda.iter().enumerate() {
        if l.re > bound.gamma {
            return Err(Error::Precondition(format!(
                "Re Lambda_{n} = {} exceeds gamma = {}",
                l.re, bound.gamma
            )));
        }
    }
    Ok(())
}

fn exp_lambda(frame: &FrameMatrix, t: f64) -> DMatrix<Complex64> {
    let mut el = frame.e.clone();
    for (j, mut col) in el.column_iter_mut().enumerate() {
        col *= (frame.lambda[j] * t).exp();
    }
    el
}

/// `||T_t E - E exp(Lambda t)||` against `epsilon t M exp(gamma t)` for each `t`.
pub fn semigroup_bound_check(
    a: &DMatrix<Complex64>,
    frame: &FrameMatrix,
    bound: &EvolutionBound,
    t_list: &[f64],
) -> Result<Vec<BoundRow>> {
    frame.check_operator(a)?;
    check_hypothesis(frame, bound)?;
    let floor = rounding_floor(frame);
    t_list
        .iter()
        .map(|&t| {
            let diff = propagator(a, t)? * &frame.e - exp_lambda(frame, t);
            let lhs = weighted_operator_norm(&diff, None, Some(&frame.weights));
            let b = bound.epsilon * t * bound.m * (bound.gamma * t).exp();
            Ok(row(t, lhs, b, floor))
        })
        .collect()
}

/// `floor` absorbs rounding in the reference propagator when the bound itself is zero.
fn row(t: f64, lhs: f64, bound: f64, floor: f64) -> BoundRow {
    let ratio = if bound > 0.0 { lhs / bound } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    BoundRow { t, lhs, bound, ratio, holds: lhs <= bound * (1.0 + REFERENCE_SLACK) + floor }
}

fn rounding_floor(frame: &FrameMatrix) -> f64 {
    1e-12 * frame.synthesis_norm()
}

/// Bound for a perturbed frame `E'` with `||E - E'|| <= eta`:
/// `||T_t E' - E' exp(Lambda t)|| <= max(eta, epsilon) (1 + M + t M) exp(gamma t)`.
pub fn perturbed_bound_check(
    a: &DMatrix<Complex64>,
    frame: &FrameMatrix,
    e_prime: &DMatrix<Complex64>,
    bound: &EvolutionBound,
    t_list: &[f64],
) -> Result<Vec<BoundRow>> {
    frame.check_operator(a)?;
    check_hypothesis(frame, bound)?;
    if e_prime.shape() != frame.e.shape() {
        return Err(Error::DimensionMismatch { expected: frame.e.ncols(), actual: e_prime.ncols() });
    }
    let eta = weighted_operator_norm(&(&frame.e - e_prime), None, Some(&frame.weights));
    let eps = eta.max(bound.epsilon);
    let other = FrameMatrix { e: e_prime.clone(), ..frame.clone() };
    let floor = rounding_floor(&other);
    t_list
        .iter()
        .map(|&t| {
            let diff = propagator(a, t)? * e_prime - exp_lambda(&other, t);
            let lhs = weighted_operator_norm(&diff, None, Some(&frame.weights));
            let b = eps * (1.0 + bound.m + t * bound.m) * (bound.gamma * t).exp();
            Ok(row(t, lhs, b, floor))
        })
        .collect()
}

/// Writes `t, lhs, bound, ratio` rows.
pub fn write_bound_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "lhs", "bound", "ratio"])?;
    for r in rows {
        w.write_record([r.t.to_string(), r.lhs.to_string(), r.bound.to_string(), r.ratio.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `F_delta = (E* E + delta)^{-1} E*` together with the condition number of the system.
#[derive(Debug, Clone)]
pub struct RegularizedInverse {
    pub delta: f64,
    pub matrix: DMatrix<Complex64>,
    pub condition: f64,
}

impl RegularizedInverse {
    pub fn ill_conditioned(&self) -> bool {
        self.condition > CONDITION_WARNING
    }

    pub fn apply(&self, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if f.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: self.matrix.ncols(), actual: f.len() });
        }
        Ok(&self.matrix * f)
    }
}

pub fn regularized_inverse(frame: &FrameMatrix, delta: f64) -> Result<RegularizedInverse> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Precondition(format!("regularization delta must be positive, got {delta}")));
    }
    let n = frame.columns();
    let mut g = frame.gram();
    // symmetrize against rounding before factorizing
    g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    for k in 0..n {
        g[(k, k)] += delta;
    }
    let ev = g.clone().symmetric_eigenvalues();
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::Numeric("regularized Gram matrix is not positive definite".into()))?;
    let matrix = chol.solve(&frame.adjoint());
    Ok(RegularizedInverse { delta, matrix, condition: hi / lo })
}

/// `phi = F_delta f` and `||f - E phi||`.
pub fn reconstruct(frame: &FrameMatrix, f: &DVector<Complex64>, delta: f64) -> Result<(DVector<Complex64>, f64)> {
    let inv = regularized_inverse(frame, delta)?;
    let phi = inv.apply(f)?;
    let err = frame.norm_of(&(f - &frame.e * &phi));
    Ok((phi, err))
}

/// Result of approximating `T_t f` by `E exp(Lambda t) F_delta f`.
#[derive(Debug, Clone)]
pub struct EvolveReport {
    pub t: f64,
    pub delta: f64,
    pub approx: DVector<Complex64>,
    pub error: f64,
    pub recon_error: f64,
    pub phi_norm: f64,
    /// `||f - E phi|| M e^{gamma t} + epsilon ||phi|| t M e^{gamma t}`.
    pub budget: f64,
    pub holds: bool,
}

pub fn evolve_approx(
    a: &DMatrix<Complex64>,
    frame: &FrameMatrix,
    bound: &EvolutionBound,
    f: &DVector<Complex64>,
    delta: f64,
    t: f64,
) -> Result<EvolveReport> {
    frame.check_operator(a)?;
    check_hypothesis(frame, bound)?;
    let (phi, recon_error) = reconstruct(frame, f, delta)?;
    let growth = bound.m * (bound.gamma * t).exp();
    let evolved_phi = DVector::from_iterator(phi.len(), phi.iter().enumerate().map(|(j, p)| p * (frame.lambda[j] * t).exp()));
    let approx = &frame.e * evolved_phi;
    let reference = propagator(a, t)? * f;
    let error = frame.norm_of(&(&reference - &approx));
    let phi_norm = phi.norm();
    let budget = recon_error * growth + bound.epsilon * phi_norm * t * growth;
    let holds = error <= budget * (1.0 + REFERENCE_SLACK) + 1e-12 * frame.norm_of(f);
    Ok(EvolveReport { t, delta, approx, error, recon_error, phi_norm, budget, holds })
}

/// Pseudospectral membership of one `Lambda_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionRow {
    pub lambda: Complex64,
    pub s_min: f64,
    pub inside: bool,
}

/// `s_min(A - Lambda_n) < epsilon` for each column, in the weighted norm.
pub fn pseudospectrum_inclusion(a: &DMatrix<Complex64>, frame: &FrameMatrix, epsilon: f64) -> Result<Vec<InclusionRow>> {
    frame.check_operator(a)?;
    let b = similarity(a, &frame.weights)?;
    Ok(frame
        .lambda
        .as_slice()
        .par_iter()
        .map(|&lambda| {
            let mut m = b.clone();
            for k in 0..m.nrows() {
                m[(k, k)] -= lambda;
            }
            let (s_min, _, _) = smallest_singular_value(&m);
            InclusionRow { lambda, s_min, inside: s_min < epsilon }
        })
        .collect())
}

fn check_symbol(frame: &FrameMatrix, f_vals: &[f64]) -> Result<()> {
    if f_vals.len() != frame.columns() {
        return Err(Error::DimensionMismatch { expected: frame.columns(), actual: f_vals.len() });
    }
    Ok(())
}

/// `Q(f) = E diag(f) E*`.
pub fn quantize(frame: &FrameMatrix, f_vals: &[f64]) -> Result<DMatrix<Complex64>> {
    check_symbol(frame, f_vals)?;
    Ok(scale_cols(&frame.e, f_vals) * frame.adjoint())
}

/// `S_delta(f) = E diag(f) F_delta`.
pub fn quantize_regularized(frame: &FrameMatrix, f_vals: &[f64], delta: f64) -> Result<DMatrix<Complex64>> {
    check_symbol(frame, f_vals)?;
    let inv = regularized_inverse(frame, delta)?;
    Ok(scale_cols(&frame.e, f_vals) * inv.matrix)
}

/// Smallest eigenvalue of an operator on the weighted space that is self-adjoint there.
pub fn smallest_weighted_eigenvalue(q: &DMatrix<Complex64>, weights: &[f64]) -> Result<f64> {
    let b = similarity(q, weights)?;
    let herm = (&b + b.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_frame(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> FrameMatrix {
        let grid: Vec<f64> = (0..rows).map(|k| k as f64).collect();
        let weights: Vec<f64> = (0..rows).map(|_| rng.random_range(0.5..2.0)).collect();
        let columns = (0..cols)
            .map(|_| (0..rows).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            .collect();
        let lambda = (0..cols).map(|_| c(rng.random_range(-1.0..0.0), rng.random_range(-1.0..1.0))).collect();
        FrameMatrix::from_columns(grid, weights, columns, lambda).unwrap()
    }

    fn identity_frame(lambda: &[Complex64]) -> FrameMatrix {
        let n = lambda.len();
        let columns = (0..n).map(|j| (0..n).map(|k| if j == k { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect();
        FrameMatrix::from_columns((0..n).map(|k| k as f64).collect(), vec![1.0; n], columns, lambda.to_vec()).unwrap()
    }

    #[test]
    fn columns_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_frame(&mut rng, 20, 5);
        for j in 0..5 {
            let col: Vec<Complex64> = f.e.column(j).iter().copied().collect();
            assert!((weighted_norm(&col, &f.weights) - 1.0).abs() < 1e-12);
        }
        let dup = FrameMatrix::from_columns(
            f.grid.clone(),
            f.weights.clone(),
            vec![f.e.column(0).iter().copied().collect(), f.e.column(0).iter().copied().collect()],
            vec![c(0.0, 0.0); 2],
        )
        .unwrap();
        assert!(dup.condition_number().is_infinite());
        assert!(FrameMatrix::from_columns(vec![0.0], vec![1.0], vec![], vec![]).is_err());
    }

    #[test]
    fn diagonal_generator_has_no_defect() {
        let lam = [c(-1.0, 0.5), c(-0.2, 0.0), c(-3.0, -2.0)];
        let f = identity_frame(&lam);
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&lam));
        assert!(defect(&a, &f).unwrap() < 1e-15);
        let bound = evolution_bound(&a, &f).unwrap();
        assert!((bound.gamma + 0.2).abs() < 1e-14);
        for r in semigroup_bound_check(&a, &f, &bound, &[0.1, 0.5, 1.0]).unwrap() {
            assert!(r.lhs < 1e-14 && r.holds);
        }
        let bad = EvolutionBound { gamma: -1.0, ..bound };
        assert!(matches!(semigroup_bound_check(&a, &f, &bad, &[1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn jordan_block_bound_holds() {
        let a = DMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let columns = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.05, 0.0)]];
        let f = FrameMatrix::from_columns(vec![0.0, 1.0], vec![1.0, 1.0], columns, vec![c(-1.0, 0.0); 2]).unwrap();
        let eps = defect(&a, &f).unwrap();
        assert!(eps > 0.0);
        let b = similarity(&a, &f.weights).unwrap();
        let omega = *hermitian_part_eigenvalues(&b).last().unwrap();
        let bound = EvolutionBound { m: 1.0, gamma: omega, epsilon: eps };
        let rows = semigroup_bound_check(&a, &f, &bound, &[0.1, 0.5, 1.0, 3.0]).unwrap();
        assert!(rows.iter().all(|r| r.holds));
        assert!(rows[2].ratio > 1.0 / 50.0);
        let pert = &f.e + DMatrix::from_element(2, 2, c(1e-3, 0.0));
        assert!(perturbed_bound_check(&a, &f, &pert, &bound, &[0.5, 1.0]).unwrap().iter().all(|r| r.holds));
    }

    #[test]
    fn defect_is_the_largest_random_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_frame(&mut rng, 15, 4);
        let a = DMatrix::from_fn(15, 15, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let eps = defect(&a, &f).unwrap();
        let d = defect_matrix(&a, &f).unwrap();
        let l1 = synthesis_defect(&a, &f).unwrap();
        for _ in 0..1000 {
            let phi = DVector::from_fn(4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let r = f.norm_of(&(&d * &phi));
            assert!(r <= eps * phi.norm() * (1.0 + 1e-12));
            assert!(r <= l1 * phi.iter().map(|v| v.norm()).sum::<f64>() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn regularized_inverse_special_cases() {
        let f = identity_frame(&[c(0.0, 0.0); 4]);
        let inv = regularized_inverse(&f, 0.25).unwrap();
        assert!((inv.matrix - DMatrix::identity(4, 4) * c(0.8, 0.0)).norm() < 1e-14);
        assert!(regularized_inverse(&f, 0.0).is_err());
        let mut zero = f.clone();
        zero.e.fill(c(0.0, 0.0));
        assert!(regularized_inverse(&zero, 1e-3).unwrap().matrix.norm() == 0.0);
    }

    #[test]
    fn reconstruction_ladder() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_frame(&mut rng, 30, 6);
        let target: DVector<Complex64> = f.e.column(0).into_owned();
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let (_, err) = reconstruct(&f, &target, 10f64.powi(-k)).unwrap();
            assert!(err < prev);
            prev = err;
        }
        assert!(reconstruct(&f, &target, 1e-10).unwrap().1 < 1e-6);
        // a vector orthogonal to every column in the weighted inner product
        let p = DMatrix::identity(30, 30) - &f.e * regularized_inverse(&f, 1e-14).unwrap().matrix;
        let g = &p * DVector::from_fn(30, |k, _| c((k as f64).sin(), 1.0));
        assert!((f.adjoint() * &g).norm() < 1e-8 * f.norm_of(&g));
        for d in [1e-1, 1e-4] {
            let (phi, err) = reconstruct(&f, &g, d).unwrap();
            assert!(phi.norm() < 1e-7);
            assert!((err - f.norm_of(&g)).abs() < 1e-7);
        }
    }

    #[test]
    fn evolution_of_in_span_vectors() {
        let lam = [c(-1.0, 0.5), c(-0.2, 0.0), c(-3.0, -2.0)];
        let f = identity_frame(&lam);
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&lam));
        let bound = evolution_bound(&a, &f).unwrap();
        let v = DVector::from_row_slice(&[c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let rep = evolve_approx(&a, &f, &bound, &v, 1e-12, 0.7).unwrap();
        assert!(rep.error < 1e-10 && rep.holds);
    }

    #[test]
    fn quantization_of_orthonormal_frame_is_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_frame(&mut rng, 12, 4);
        let w = sqrt_all(&f.weights);
        let q = scale_rows(&f.e, &w).qr().q();
        let cols: Vec<Vec<Complex64>> = (0..4).map(|j| q.column(j).iter().zip(&w).map(|(v, s)| v / *s).collect()).collect();
        let on = FrameMatrix::from_columns(f.grid.clone(), f.weights.clone(), cols, vec![c(0.0, 0.0); 4]).unwrap();
        let p = quantize(&on, &[1.0; 4]).unwrap();
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!(smallest_weighted_eigenvalue(&p, &on.weights).unwrap() > -1e-12);
        let vals = [0.3, 0.0, 2.0, 1.0];
        assert!(smallest_weighted_eigenvalue(&quantize(&f, &vals).unwrap(), &f.weights).unwrap() >= -1e-12);
        assert!(quantize(&f, &[1.0]).is_err());
        let s = quantize_regularized(&on, &[1.0; 4], 1e-8).unwrap();
        assert!((s - p).norm() < 1e-6);
    }
}
