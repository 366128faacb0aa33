//! Phase-space synthesis transforms built from normalized pseudomode, Gaussian and
//! distorted FBI kernels, with their norm and orthogonality diagnostics.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{trapezoid_weights, weighted_norm, Grid1D};
use crate::linalg::{scale_cols, scale_rows, spectral_norm, sqrt_all};
use crate::quadrature::integrate_to_infinity;
use crate::symbol::{region_mask, twist_curvature, CoefficientField, PhasePoint};
use crate::wkb::{assemble_mode, gaussian_mode, ModeOptions, Pseudomode};

/// Exponent beyond which a Gaussian factor is below `1e-16` and treated as zero.
const GAUSSIAN_CUTOFF: f64 = 36.84;
/// Default cap on power iterations.
pub const POWER_ITERATIONS: usize = 50;
pub const POWER_TOL: f64 = 1e-10;
/// Default cap on Lanczos steps for operator norms.
pub const LANCZOS_STEPS: usize = 300;
pub const LANCZOS_TOL: f64 = 1e-12;

fn axis_weights(g: &[f64]) -> Vec<f64> {
    if g.len() == 1 {
        vec![1.0]
    } else {
        trapezoid_weights(g)
    }
}

fn check_axis(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Precondition(format!("{name} grid is empty")));
    }
    if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(format!("{name} grid must be finite and strictly increasing")));
    }
    Ok(())
}

/// Phase-space quadrature nodes with product trapezoid weights. A single-node axis gets
/// unit weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub u_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub weights: Vec<f64>,
}

impl PhaseSpaceGrid {
    /// The rectangle `u_grid x xi_grid` clipped to the positive-bracket region of `cf`.
    pub fn clipped(cf: &CoefficientField, u_grid: &[f64], xi_grid: &[f64]) -> Result<Self> {
        let mask = region_mask(cf, u_grid, xi_grid)?;
        let (wu, wx) = (axis_weights(u_grid), axis_weights(xi_grid));
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, &u) in u_grid.iter().enumerate() {
            for (j, &xi) in xi_grid.iter().enumerate() {
                if mask.in_omega[i][j] {
                    points.push(PhasePoint::new(u, xi));
                    weights.push(wu[i] * wx[j]);
                }
            }
        }
        if points.is_empty() {
            return Err(Error::Precondition("no grid point lies in the positive-bracket region".into()));
        }
        Ok(PhaseSpaceGrid { u_grid: u_grid.to_vec(), xi_grid: xi_grid.to_vec(), points, weights })
    }

    /// Full product grid on the upper half plane `xi > 0`.
    pub fn half_plane(u_grid: &[f64], xi_grid: &[f64]) -> Result<Self> {
        check_axis("u", u_grid)?;
        check_axis("xi", xi_grid)?;
        if xi_grid[0] <= 0.0 {
            return Err(Error::Precondition(format!("xi grid must be positive, found {}", xi_grid[0])));
        }
        let (wu, wx) = (axis_weights(u_grid), axis_weights(xi_grid));
        let mut points = Vec::with_capacity(u_grid.len() * xi_grid.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (i, &u) in u_grid.iter().enumerate() {
            for (j, &xi) in xi_grid.iter().enumerate() {
                points.push(PhasePoint::new(u, xi));
                weights.push(wu[i] * wx[j]);
            }
        }
        Ok(PhaseSpaceGrid { u_grid: u_grid.to_vec(), xi_grid: xi_grid.to_vec(), points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.u), hi.max(p.u)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KernelKind {
    FullJwkb { n: usize, opts: ModeOptions },
    Gaussian,
    DistortedFrozen { kappa: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformKernel {
    pub kind: KernelKind,
    pub h: f64,
}

/// `exp{i xi s / h - s^2 / (2 h kappa xi)}`.
pub fn distorted_kernel(kappa: Complex64, h: f64, xi: f64, s: f64) -> Complex64 {
    let q = Complex64::new(0.0, xi * s / h) - s * s / (2.0 * h * xi) / kappa;
    if -q.re > GAUSSIAN_CUTOFF {
        Complex64::new(0.0, 0.0)
    } else {
        q.exp()
    }
}

/// `||g~||^2 = (pi h xi / Re(1/kappa))^{1/2}`.
pub fn distorted_kernel_norm_sq(kappa: Complex64, h: f64, xi: f64) -> f64 {
    (PI * h * xi / kappa.inv().re).sqrt()
}

fn check_kappa(kappa: Complex64) -> Result<()> {
    if !(kappa.re > 0.0) || !kappa.is_finite() {
        return Err(Error::Precondition(format!("kappa = {kappa} must have positive real part")));
    }
    Ok(())
}

/// A transform realized on an `x`-grid: column `j` is the unit kernel at grid point `j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transform {
    pub kernel: TransformKernel,
    pub grid: PhaseSpaceGrid,
    pub x: Vec<f64>,
    pub x_weights: Vec<f64>,
    /// Overall factor, `h^{-1/2}` for the distorted transform and 1 otherwise.
    pub scale: f64,
    pub columns: DMatrix<Complex64>,
}

fn mode_column(mode: &Pseudomode, x: &[f64]) -> Result<Vec<Complex64>> {
    let (lo, hi) = mode.span();
    x.iter()
        .map(|&t| {
            if t < lo || t > hi {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                Ok(mode.eval(t)?[0])
            }
        })
        .collect()
}

impl Transform {
    pub fn new(kernel: TransformKernel, cf: Option<&CoefficientField>, grid: PhaseSpaceGrid, x: &Grid1D) -> Result<Self> {
        let h = kernel.h;
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::Precondition(format!("semiclassical parameter h = {h} must lie in (0, 1]")));
        }
        if grid.is_empty() {
            return Err(Error::Precondition("phase-space grid is empty".into()));
        }
        let xs = x.points();
        let xw = x.weights();
        let scale = match kernel.kind {
            KernelKind::DistortedFrozen { kappa } => {
                check_kappa(kappa)?;
                if let Some(p) = grid.points.iter().find(|p| !(p.xi > 0.0)) {
                    return Err(Error::Precondition(format!("distorted kernel needs xi > 0, found {}", p.xi)));
                }
                h.powf(-0.5)
            }
            _ => {
                if cf.is_none() {
                    return Err(Error::Precondition("pseudomode and Gaussian kernels need coefficients".into()));
                }
                1.0
            }
        };
        let cols: Vec<Vec<Complex64>> = grid
            .points
            .par_iter()
            .map(|&p| {
                let raw = match kernel.kind {
                    KernelKind::FullJwkb { n, opts } => {
                        let mode = assemble_mode(cf.unwrap(), p, h, n, &opts)?;
                        mode_column(&mode, &xs)?
                    }
                    KernelKind::Gaussian => {
                        let mode = gaussian_mode(cf.unwrap(), p, h, 16)?;
                        xs.iter().map(|&t| Ok(mode.eval(t)?[0])).collect::<Result<_>>()?
                    }
                    KernelKind::DistortedFrozen { kappa } => {
                        xs.iter().map(|&t| distorted_kernel(kappa, h, p.xi, t - p.u)).collect()
                    }
                };
                let nrm = weighted_norm(&raw, &xw);
                if !(nrm > 0.0) || !nrm.is_finite() {
                    return Err(Error::Numeric(format!(
                        "kernel at (u = {}, xi = {}) has norm {nrm} on the x-grid",
                        p.u, p.xi
                    )));
                }
                Ok(raw.into_iter().map(|v| v / nrm).collect())
            })
            .collect::<Result<_>>()?;
        let m = xs.len();
        let columns = DMatrix::from_fn(m, cols.len(), |i, j| cols[j][i]);
        Ok(Transform { kernel, grid, x: xs, x_weights: xw, scale, columns })
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.columns
            .column_iter()
            .map(|c| weighted_norm(c.as_slice(), &self.x_weights))
            .collect()
    }

    /// `scale * sum_j w_j phi_j e_j`.
    pub fn synthesize(&self, phi: &[Complex64]) -> Result<Vec<Complex64>> {
        if phi.len() != self.grid.len() {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), actual: phi.len() });
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("phase-space density is not finite".into()));
        }
        let v = DVector::from_iterator(
            phi.len(),
            phi.iter().zip(&self.grid.weights).map(|(p, w)| p * (w * self.scale)),
        );
        Ok((&self.columns * v).as_slice().to_vec())
    }

    /// `scale * <e_j, f>` in the weighted `x` inner product; the adjoint of
    /// [`Transform::synthesize`].
    pub fn analyze(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        if f.len() != self.x.len() {
            return Err(Error::DimensionMismatch { expected: self.x.len(), actual: f.len() });
        }
        let v = DVector::from_iterator(
            f.len(),
            f.iter().zip(&self.x_weights).map(|(f, w)| f * (w * self.scale)),
        );
        Ok(self.columns.ad_mul(&v).as_slice().to_vec())
    }

    /// The matrix `scale * K diag(w)` acting on phase-space samples.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let w: Vec<f64> = self.grid.weights.iter().map(|w| w * self.scale).collect();
        scale_cols(&self.columns, &w)
    }

    /// `sup_j ||scale e_j||`, the norm from `L^1` of the phase-space grid.
    pub fn l1_norm(&self) -> f64 {
        self.column_norms().into_iter().fold(0.0, f64::max) * self.scale
    }

    /// Matrix of the transform between orthonormal bases of the weighted spaces.
    pub fn normalized_matrix(&self) -> DMatrix<Complex64> {
        let ws = sqrt_all(&self.grid.weights);
        let xs = sqrt_all(&self.x_weights);
        scale_rows(&scale_cols(&self.columns, &ws), &xs) * Complex64::new(self.scale, 0.0)
    }

    /// `L^2 -> L^2` norm by Lanczos on the Gram matrix.
    pub fn operator_norm(&self) -> NormEstimate {
        lanczos_norm(&self.normalized_matrix(), LANCZOS_STEPS, LANCZOS_TOL)
    }

    /// `L^2 -> L^2` norm by plain power iteration on the Gram matrix.
    pub fn power_operator_norm(&self, max_iter: usize, tol: f64) -> NormEstimate {
        power_norm(&self.normalized_matrix(), max_iter, tol)
    }

    /// `||E* f|| / ||f||` in the weighted norms.
    pub fn analysis_ratio(&self, f: &[Complex64]) -> Result<f64> {
        let nf = weighted_norm(f, &self.x_weights);
        if !(nf > 0.0) {
            return Err(Error::Precondition("analysis ratio needs a nonzero function".into()));
        }
        Ok(weighted_norm(&self.analyze(f)?, &self.grid.weights) / nf)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let export = TransformExport {
            rows: self.columns.nrows(),
            cols: self.columns.ncols(),
            kernel: self.kernel,
            scale: self.scale,
            x: &self.x,
            x_weights: &self.x_weights,
            points: &self.grid.points,
            weights: &self.grid.weights,
            entries: self.columns.iter().map(|c| [c.re, c.im]).collect(),
        };
        serde_json::to_writer(out, &export)?;
        Ok(())
    }
}

/// Column-major complex entries of the normalized kernels.
#[derive(Serialize)]
struct TransformExport<'a> {
    rows: usize,
    cols: usize,
    kernel: TransformKernel,
    scale: f64,
    x: &'a [f64],
    x_weights: &'a [f64],
    points: &'a [PhasePoint],
    weights: &'a [f64],
    entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of `b` from the Rayleigh quotient of `b^H b`.
pub fn power_norm(b: &DMatrix<Complex64>, max_iter: usize, tol: f64) -> NormEstimate {
    let n = b.ncols();
    if n == 0 || b.nrows() == 0 {
        return NormEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = DVector::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    v /= Complex64::new(v.norm(), 0.0);
    let mut last = 0.0;
    for it in 1..=max_iter {
        let w = b.ad_mul(&(b * &v));
        let lambda = v.dotc(&w).re;
        let nw = w.norm();
        if nw == 0.0 {
            return NormEstimate { value: 0.0, iterations: it, converged: true };
        }
        v = w / Complex64::new(nw, 0.0);
        if it > 1 && (lambda - last).abs() <= tol * lambda.abs() {
            return NormEstimate { value: lambda.max(0.0).sqrt(), iterations: it, converged: true };
        }
        last = lambda;
    }
    NormEstimate { value: last.max(0.0).sqrt(), iterations: max_iter, converged: false }
}

/// Largest singular value of `b` from Lanczos on the smaller of `b^H b` and `b b^H`, with
/// full reorthogonalization.
pub fn lanczos_norm(b: &DMatrix<Complex64>, max_steps: usize, tol: f64) -> NormEstimate {
    let wide = b.nrows() < b.ncols();
    let n = if wide { b.nrows() } else { b.ncols() };
    if n == 0 || b.nrows() == 0 || b.ncols() == 0 {
        return NormEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let apply = |v: &DVector<Complex64>| -> DVector<Complex64> {
        if wide {
            b * b.ad_mul(v)
        } else {
            b.ad_mul(&(b * v))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = DVector::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    q /= Complex64::new(q.norm(), 0.0);
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut last = f64::NAN;
    let steps = max_steps.min(n);
    for it in 1..=steps {
        let mut w = apply(&q);
        let a = q.dotc(&w).re;
        basis.push(q.clone());
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w.axpy(-c, v, Complex64::new(1.0, 0.0));
            }
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let top = t.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bn = w.norm();
        let done = bn <= 1e-14 * top.abs() || it == n || (it > 1 && (top - last).abs() <= tol * top.abs());
        if done {
            return NormEstimate { value: top.max(0.0).sqrt(), iterations: it, converged: true };
        }
        last = top;
        beta.push(bn);
        q = w / Complex64::new(bn, 0.0);
    }
    NormEstimate { value: last.max(0.0).sqrt(), iterations: steps, converged: false }
}

/// Distorted FBI transform with frozen `kappa` on a `(u, xi)` grid in `xi > 0`.
pub fn distorted_fbi(kappa: Complex64, h: f64, u_grid: &[f64], xi_grid: &[f64], x: &Grid1D) -> Result<Transform> {
    check_kappa(kappa)?;
    let grid = PhaseSpaceGrid::half_plane(u_grid, xi_grid)?;
    Transform::new(TransformKernel { kind: KernelKind::DistortedFrozen { kappa }, h }, None, grid, x)
}

/// Grids resolving the distorted kernels for `xi` in `band`: spacing in `u` of half the
/// narrowest kernel width, in `xi` of half the widest frequency spread (at most 1/64 of
/// the band), and in `x` below the Nyquist step of the fastest kernel. `refine` divides
/// every spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortedLayout {
    pub kappa: Complex64,
    pub h: f64,
    pub band: (f64, f64),
    pub refine: f64,
}

impl DistortedLayout {
    pub fn grids(&self) -> Result<(Vec<f64>, Vec<f64>, Grid1D)> {
        check_kappa(self.kappa)?;
        let (lo, hi) = self.band;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Precondition(format!("xi band [{lo}, {hi}] must be positive and increasing")));
        }
        if !(self.refine >= 1.0 && self.refine.is_finite()) {
            return Err(Error::Precondition(format!("refine = {} must be at least 1", self.refine)));
        }
        let h = self.h;
        let rk = self.kappa.inv().re;
        let wide = (h * hi / rk).sqrt();
        let narrow = (h * lo / rk).sqrt();
        let reach = 8.0 * wide;
        let du = narrow / 2.0 / self.refine;
        let nu = (2.0 * reach / du).ceil() as usize + 1;
        let dxi = ((h * rk / hi).sqrt() / 2.0).min((hi - lo) / 64.0) / self.refine;
        let nxi = ((hi - lo) / dxi).ceil() as usize + 1;
        let xl = reach + 8.0 * wide;
        let dx = PI / (hi / h + 8.0 / narrow) / self.refine;
        let nx = (2.0 * xl / dx).ceil() as usize + 1;
        Ok((crate::grid::linspace(-reach, reach, nu), crate::grid::linspace(lo, hi, nxi), Grid1D::new(-xl, xl, nx)?))
    }

    pub fn build(&self) -> Result<Transform> {
        let (u, xi, x) = self.grids()?;
        distorted_fbi(self.kappa, self.h, &u, &xi, &x)
    }
}

/// `max_j ||e_j - e'_j||` between normalized pseudomode and Gaussian kernels.
pub fn gaussian_kernel_compare(
    cf: &CoefficientField,
    grid: &PhaseSpaceGrid,
    h: f64,
    n: usize,
    opts: &ModeOptions,
) -> Result<f64> {
    let diffs: Vec<f64> = grid
        .points
        .par_iter()
        .map(|&p| {
            let f = assemble_mode(cf, p, h, n, opts)?;
            let g = gaussian_mode(cf, p, h, opts.points)?;
            normalized_distance(&f, &g, 2 * opts.points)
        })
        .collect::<Result<_>>()?;
    Ok(diffs.into_iter().fold(0.0, f64::max))
}

/// `|| a/||a|| - b/||b|| ||` on a uniform grid covering both spans.
pub fn normalized_distance(a: &Pseudomode, b: &Pseudomode, points: usize) -> Result<f64> {
    let (a0, a1) = a.span();
    let (b0, b1) = b.span();
    let x = Grid1D::new(a0.min(b0), a1.max(b1), points)?;
    let xs = x.points();
    let w = x.weights();
    let fa = mode_column(a, &xs)?;
    let fb = mode_column(b, &xs)?;
    let (na, nb) = (weighted_norm(&fa, &w), weighted_norm(&fb, &w));
    let d: Vec<Complex64> = fa.iter().zip(&fb).map(|(p, q)| p / na - q / nb).collect();
    Ok(weighted_norm(&d, &w))
}

/// `|| W_U^{1/2} (E_U^* E_V) W_V^{1/2} ||` for transforms on the same `x`-grid.
pub fn cross_gram_norm(tu: &Transform, tv: &Transform) -> Result<f64> {
    if tu.x != tv.x {
        return Err(Error::Precondition("transforms live on different x-grids".into()));
    }
    let ku = scale_rows(&tu.columns, &tu.x_weights);
    let g = ku.ad_mul(&tv.columns) * Complex64::new(tu.scale * tv.scale, 0.0);
    let g = scale_cols(&scale_rows(&g, &sqrt_all(&tu.grid.weights)), &sqrt_all(&tv.grid.weights));
    Ok(spectral_norm(&g))
}

/// Cross-Gram norm of two transforms whose `u`-projections are disjoint.
pub fn asymptotic_orthogonality(tu: &Transform, tv: &Transform) -> Result<f64> {
    let (a0, a1) = tu.grid.u_range();
    let (b0, b1) = tv.grid.u_range();
    if !(a1 < b0 || b1 < a0) {
        return Err(Error::Precondition(format!(
            "u-projections [{a0}, {a1}] and [{b0}, {b1}] overlap"
        )));
    }
    cross_gram_norm(tu, tv)
}

/// `<g_1, g_2>` for `g_j = exp((i xi_j s_j + k_j s_j^2 / 2) / h)`, `s_j = x - u_j`.
pub fn gaussian_overlap(u1: f64, xi1: f64, k1: Complex64, u2: f64, xi2: f64, k2: Complex64, h: f64) -> Complex64 {
    let i = Complex64::i();
    let (c1, c2) = (k1.conj(), k2);
    let a = (c1 + c2) / 2.0;
    let b = -i * xi1 + i * xi2 - c1 * u1 - c2 * u2;
    let c = i * xi1 * u1 - i * xi2 * u2 + (c1 * u1 * u1 + c2 * u2 * u2) / 2.0;
    (PI * h / -a).sqrt() * ((c - b * b / (4.0 * a)) / h).exp()
}

/// Twist curvature of `cf` at each grid point, for Gaussian overlap checks.
pub fn twists(cf: &CoefficientField, grid: &PhaseSpaceGrid) -> Result<Vec<Complex64>> {
    grid.points.iter().map(|&p| twist_curvature(cf, p)).collect()
}

fn check_profile_args(c6: f64, h: f64) -> Result<()> {
    if !(c6 > 0.0 && c6.is_finite()) {
        return Err(Error::Precondition(format!("c6 = {c6} must be positive")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Precondition(format!("h = {h} must be positive")));
    }
    Ok(())
}

/// `int_0^inf h^{-1/2} rho^{1/2} exp{-c6 (xi/h - s)^2 h rho} dxi` with `rho = rho(xi)`.
fn weighted_profile(rho: &(dyn Fn(f64) -> f64 + Sync), c6: f64, h: f64, s: f64) -> Result<f64> {
    let f = |xi: f64| {
        if xi <= 0.0 {
            return 0.0;
        }
        let r = rho(xi);
        let e = c6 * (xi / h - s).powi(2) * h * r;
        if e > GAUSSIAN_CUTOFF + 10.0 {
            0.0
        } else {
            h.powf(-0.5) * r.sqrt() * (-e).exp()
        }
    };
    let mut breaks: Vec<f64> = (-24..=24).map(|k| 10f64.powf(k as f64 / 3.0)).collect();
    let xi0 = h * s;
    if xi0 > 0.0 {
        let width = (h / (c6 * rho(xi0))).sqrt();
        for m in [-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0] {
            breaks.push(xi0 + m * width);
        }
    }
    integrate_to_infinity(f, 0.0, &breaks, 1e-300, 1e-11)
}

/// `F(h, s) = int_0^inf h^{-1/2} xi^{1/2} exp{-c6 (xi/h - s)^2 h xi} dxi`.
pub fn boundedness_profile(c6: f64, h: f64, s: f64) -> Result<f64> {
    check_profile_args(c6, h)?;
    if !s.is_finite() {
        return Err(Error::Precondition(format!("s = {s} must be finite")));
    }
    weighted_profile(&|xi| xi, c6, h, s)
}

/// `G(t) = t^{1/2} int_0^inf tau^{1/2} exp(-c6 t tau (tau - 1)^2) dtau`.
pub fn g_profile(c6: f64, t: f64) -> Result<f64> {
    check_profile_args(c6, 1.0)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("t = {t} must be positive")));
    }
    let f = |tau: f64| {
        let e = c6 * t * tau * (tau - 1.0).powi(2);
        if e > GAUSSIAN_CUTOFF + 10.0 {
            0.0
        } else {
            tau.sqrt() * (-e).exp()
        }
    };
    let width = 1.0 / (c6 * t).sqrt();
    let mut breaks: Vec<f64> = (-12..=24).map(|k| 10f64.powf(k as f64 / 3.0)).collect();
    for m in [-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0] {
        breaks.push(1.0 + m * width);
    }
    Ok(t.sqrt() * integrate_to_infinity(f, 0.0, &breaks, 1e-300, 1e-11)?)
}

/// `lim_{t -> 0} G(t) = F(h, 0) = sqrt(pi) / (3 sqrt(c6))`.
pub fn profile_limit(c6: f64) -> f64 {
    PI.sqrt() / (3.0 * c6.sqrt())
}

/// Power-law sandwich for `Re kappa(xi)` near 0 and near infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaBounds {
    pub alpha0: f64,
    pub alpha_inf: f64,
    pub c0: f64,
    pub c_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub bounded: bool,
    pub sup: f64,
    /// `(h, s, F)` at every probe.
    pub values: Vec<(f64, f64, f64)>,
}

/// Probe values of `s` for step `h`: `0` and `+-xi_0 / h` over logarithmic `xi_0`.
pub fn default_probes(h: f64) -> Vec<f64> {
    let mut s = vec![0.0];
    for k in -9..=9 {
        let xi0 = 10f64.powf(k as f64 / 3.0);
        s.push(xi0 / h);
        s.push(-xi0 / h);
    }
    s
}

/// Checks the sandwich bounds on probe points, then evaluates the generalized profile
/// with `Re kappa(xi)` in place of `kappa xi` over `h_list` and [`default_probes`].
pub fn generalized_kappa_check(
    kappa: &(dyn Fn(f64) -> Complex64 + Sync),
    bounds: &KappaBounds,
    c6: f64,
    h_list: &[f64],
) -> Result<KappaReport> {
    check_profile_args(c6, 1.0)?;
    if !(bounds.c0 >= 1.0 && bounds.c_inf >= 1.0) {
        return Err(Error::Precondition("sandwich constants must be at least 1".into()));
    }
    let slack = 1.0 + 1e-12;
    for k in -18..=18 {
        let xi = 10f64.powf(k as f64 / 3.0);
        let r = kappa(xi).re;
        let (c, a) = if xi <= 1.0 { (bounds.c0, bounds.alpha0) } else { (bounds.c_inf, bounds.alpha_inf) };
        let p = xi.powf(a);
        if !(r * c * slack >= p && r <= c * p * slack) {
            return Err(Error::Precondition(format!(
                "Re kappa({xi:e}) = {r:e} violates the sandwich bound with constant {c}"
            )));
        }
    }
    let rho = |xi: f64| kappa(xi).re;
    let mut values = Vec::new();
    for &h in h_list {
        check_profile_args(c6, h)?;
        for s in default_probes(h) {
            values.push((h, s, weighted_profile(&rho, c6, h, s)?));
        }
    }
    let sup = values.iter().map(|v| v.2).fold(0.0, f64::max);
    Ok(KappaReport { bounded: sup.is_finite(), sup, values })
}

/// Smooth random signal `sum_k a_k exp(i s_k x)` with frequencies in `band`, under a
/// Gaussian envelope of width `width` about `center`.
pub fn random_band_limited(
    x: &[f64],
    band: (f64, f64),
    center: f64,
    width: f64,
    terms: usize,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    let waves: Vec<(f64, Complex64)> = (0..terms)
        .map(|_| {
            let s = band.0 + (band.1 - band.0) * rng.random::<f64>();
            let a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            (s, a)
        })
        .collect();
    x.iter()
        .map(|&t| {
            let env = (-((t - center) / width).powi(2) / 2.0).exp();
            waves.iter().map(|(s, a)| a * Complex64::new(0.0, s * t).exp()).sum::<Complex64>() * env
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// `(max - min) / mean`.
    pub spread: f64,
}

/// [`near_isometry`] on `count` random signals with frequencies in the middle half of the
/// layout's band (scaled by `1/h`) and envelopes a quarter of the `u`-reach wide.
pub fn isometry_probe(layout: &DistortedLayout, t: &Transform, count: usize, seed: u64) -> Result<IsometryReport> {
    let (lo, hi) = layout.band;
    let band = ((3.0 * lo + hi) / 4.0 / layout.h, (lo + 3.0 * hi) / 4.0 / layout.h);
    let (_, reach) = t.grid.u_range();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<Complex64>> = (0..count)
        .map(|_| random_band_limited(&t.x, band, 0.0, reach / 4.0, 6, &mut rng))
        .collect();
    near_isometry(t, &samples)
}

pub fn near_isometry(t: &Transform, samples: &[Vec<Complex64>]) -> Result<IsometryReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("near-isometry check needs samples".into()));
    }
    let ratios: Vec<f64> = samples.iter().map(|f| t.analysis_ratio(f)).collect::<Result<_>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    Ok(IsometryReport { spread: (hi - lo) / mean, mean, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use crate::quadrature::integrate;

    fn airy() -> CoefficientField {
        CoefficientField::complex_airy((-10.0, 10.0))
    }

    fn small_distorted() -> Transform {
        let x = Grid1D::new(-3.0, 3.0, 600).unwrap();
        distorted_fbi(Complex64::new(1.0, 0.5), 0.1, &linspace(-1.0, 1.0, 9), &linspace(0.5, 1.5, 5), &x).unwrap()
    }

    #[test]
    fn kernel_norm_matches_closed_form() {
        for (kappa, h, xi) in [(Complex64::new(1.0, 0.0), 0.1, 0.7), (Complex64::new(0.4, -2.0), 0.01, 1.3)] {
            let q = integrate(|s| distorted_kernel(kappa, h, xi, s).norm_sqr(), -3.0, 3.0, 1e-16, 1e-13).unwrap();
            let exact = distorted_kernel_norm_sq(kappa, h, xi);
            assert!((q - exact).abs() < 1e-8 * exact, "{q} vs {exact}");
        }
    }

    #[test]
    fn real_kappa_gives_standard_gaussian() {
        let (h, xi) = (0.05, 0.8);
        for s in [-0.3, 0.0, 0.1] {
            let g = distorted_kernel(Complex64::new(2.0, 0.0), h, xi, s);
            let expect = Complex64::new(0.0, xi * s / h).exp() * (-s * s / (4.0 * h * xi)).exp();
            assert!((g - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn columns_are_unit_and_adjoint_holds() {
        let t = small_distorted();
        assert!(t.column_norms().iter().all(|n| (n - 1.0).abs() < 1e-10));
        assert!((t.l1_norm() - 0.1f64.powf(-0.5)).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi: Vec<Complex64> = (0..t.grid.len()).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let f: Vec<Complex64> = (0..t.x.len()).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let ef = t.synthesize(&phi).unwrap();
        let lhs: Complex64 = ef.iter().zip(&f).zip(&t.x_weights).map(|((a, b), w)| a.conj() * b * *w).sum();
        let ad = t.analyze(&f).unwrap();
        let rhs: Complex64 = phi.iter().zip(&ad).zip(&t.grid.weights).map(|((a, b), w)| a.conj() * b * *w).sum();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    }

    #[test]
    fn point_mass_synthesizes_its_kernel() {
        let t = small_distorted();
        let j = 17;
        let mut phi = vec![Complex64::new(0.0, 0.0); t.grid.len()];
        phi[j] = Complex64::new(1.0 / t.grid.weights[j], 0.0);
        let e = t.synthesize(&phi).unwrap();
        for (k, v) in e.iter().enumerate() {
            assert!((v - t.columns[(k, j)] * t.scale).norm() < 1e-12);
        }
        assert!(t.synthesize(&vec![Complex64::new(0.0, 0.0); t.grid.len()]).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn power_norm_matches_svd() {
        let t = small_distorted();
        let exact = spectral_norm(&t.normalized_matrix());
        let est = t.operator_norm();
        assert!(est.converged && (est.value - exact).abs() < 1e-10 * exact, "{} vs {exact}", est.value);
        let est = t.power_operator_norm(2000, 1e-14);
        assert!((est.value - exact).abs() < 1e-6 * exact, "{} vs {exact}", est.value);
    }

    #[test]
    fn distorted_rejects_bad_input() {
        let x = Grid1D::new(-1.0, 1.0, 50).unwrap();
        assert!(distorted_fbi(Complex64::new(0.0, 1.0), 0.1, &[0.0], &[1.0], &x).is_err());
        assert!(distorted_fbi(Complex64::new(1.0, 0.0), 0.1, &[0.0], &[-0.5, 1.0], &x).is_err());
        assert!(distorted_fbi(Complex64::new(1.0, 0.0), 0.1, &[0.0], &[0.0, 1.0], &x).is_err());
    }

    #[test]
    fn profile_at_zero_and_negative_s() {
        for c6 in [0.5, 1.0, 3.0] {
            let f0 = boundedness_profile(c6, 0.01, 0.0).unwrap();
            assert!((f0 - profile_limit(c6)).abs() < 1e-8 * f0, "{f0}");
            for s in [-0.1, -10.0, -1e3] {
                assert!(boundedness_profile(c6, 0.01, s).unwrap() <= f0 * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn profile_equals_g_of_scaled_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let h = 10f64.powf(-3.0 * rng.random::<f64>());
            let s = 10f64.powf(4.0 * rng.random::<f64>() - 1.0);
            let c6 = 0.2 + 2.0 * rng.random::<f64>();
            let f = boundedness_profile(c6, h, s).unwrap();
            let g = g_profile(c6, h * h * s.powi(3)).unwrap();
            assert!((f - g).abs() < 1e-6 * f, "h {h} s {s}: {f} vs {g}");
        }
    }

    #[test]
    fn g_tends_to_profile_limit() {
        for c6 in [0.5, 2.0] {
            let g = g_profile(c6, 1e-9).unwrap();
            assert!((g / profile_limit(c6) - 1.0).abs() < 0.01);
        }
        let g = g_profile(1.0, 1e6).unwrap();
        assert!((g - PI.sqrt()).abs() < 1e-2);
    }

    #[test]
    fn kappa_identity_reduces_to_profile() {
        let b = KappaBounds { alpha0: 1.0, alpha_inf: 1.0, c0: 1.0, c_inf: 1.0 };
        let r = generalized_kappa_check(&|xi| Complex64::new(xi, 0.0), &b, 0.7, &[0.05]).unwrap();
        for (h, s, v) in &r.values {
            let f = boundedness_profile(0.7, *h, *s).unwrap();
            assert!((v - f).abs() < 1e-12 * f.max(1e-300));
        }
    }

    #[test]
    fn saturating_kappa_is_bounded_and_stable() {
        let b = KappaBounds { alpha0: 1.0, alpha_inf: 0.0, c0: 2.0, c_inf: 2.0 };
        let k = |xi: f64| Complex64::new(xi / (1.0 + xi), 0.3);
        let sups: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&h| generalized_kappa_check(&k, &b, 1.0, &[h]).unwrap().sup)
            .collect();
        assert!(sups.iter().all(|s| s.is_finite()));
        let (lo, hi) = sups.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
        assert!(hi / lo < 1.1, "{sups:?}");
    }

    #[test]
    fn vanishing_real_part_is_rejected() {
        let b = KappaBounds { alpha0: 1.0, alpha_inf: 1.0, c0: 10.0, c_inf: 10.0 };
        let e = generalized_kappa_check(&|xi| Complex64::new(0.0, xi), &b, 1.0, &[0.1]);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn gaussian_overlap_matches_quadrature() {
        let h = 0.05;
        let (k1, k2) = (Complex64::new(-0.8, 0.3), Complex64::new(-0.4, -0.2));
        let g = |u: f64, xi: f64, k: Complex64, x: f64| {
            let s = x - u;
            ((Complex64::new(0.0, xi * s) + k * s * s / 2.0) / h).exp()
        };
        let re = integrate(|x| (g(-0.2, -0.7, k1, x).conj() * g(0.3, -0.5, k2, x)).re, -6.0, 6.0, 1e-16, 1e-13).unwrap();
        let im = integrate(|x| (g(-0.2, -0.7, k1, x).conj() * g(0.3, -0.5, k2, x)).im, -6.0, 6.0, 1e-16, 1e-13).unwrap();
        let exact = gaussian_overlap(-0.2, -0.7, k1, 0.3, -0.5, k2, h);
        assert!((Complex64::new(re, im) - exact).norm() < 1e-9 * exact.norm());
    }

    #[test]
    fn single_point_orthogonality_is_the_overlap() {
        let cf = airy();
        let h = 0.05;
        let x = Grid1D::new(-4.0, 4.0, 4001).unwrap();
        let kern = TransformKernel { kind: KernelKind::Gaussian, h };
        let gu = PhaseSpaceGrid::clipped(&cf, &[-0.3], &[-0.6]).unwrap();
        let gv = PhaseSpaceGrid::clipped(&cf, &[0.3], &[-0.8]).unwrap();
        let (ku, kv) = (twists(&cf, &gu).unwrap()[0], twists(&cf, &gv).unwrap()[0]);
        let tu = Transform::new(kern, Some(&cf), gu, &x).unwrap();
        let tv = Transform::new(kern, Some(&cf), gv, &x).unwrap();
        let got = asymptotic_orthogonality(&tu, &tv).unwrap();
        let n1 = gaussian_overlap(-0.3, -0.6, ku, -0.3, -0.6, ku, h).re.sqrt();
        let n2 = gaussian_overlap(0.3, -0.8, kv, 0.3, -0.8, kv, h).re.sqrt();
        let exact = gaussian_overlap(-0.3, -0.6, ku, 0.3, -0.8, kv, h).norm() / (n1 * n2);
        assert!((got - exact).abs() < 1e-9, "{got} vs {exact}");
        assert!(asymptotic_orthogonality(&tu, &tu).is_err());
        assert!((cross_gram_norm(&tu, &tu).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clipped_grid_stays_in_region() {
        let cf = airy();
        let g = PhaseSpaceGrid::clipped(&cf, &linspace(-0.5, 0.5, 5), &linspace(-1.0, 1.0, 9)).unwrap();
        assert!(g.points.iter().all(|p| p.xi < 0.0));
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(PhaseSpaceGrid::clipped(&cf, &[0.0], &[0.5, 1.0]).is_err());
    }
}
