//! Randomized invariants across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use crate::boundary::{parabola_vertex, quadratic_roots};
use crate::fbi::{cross_gram_norm, gaussian_overlap, KernelKind, PhaseSpaceGrid, Transform, TransformKernel};
use crate::frame::{quantize, regularized_inverse, smallest_weighted_eigenvalue, FrameMatrix};
use crate::grid::{linear_fit, linspace, smallest_singular_value, Grid1D};
use crate::series::Series;
use crate::symbol::{region_mask, CoefficientField};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn matrix(n: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec(complex(), n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

/// Rows, weights, columns and symbol values of a random weighted frame.
fn frame() -> impl Strategy<Value = (FrameMatrix, Vec<f64>)> {
    (3usize..12, 1usize..16).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(0.2..3.0f64, rows),
            prop::collection::vec(prop::collection::vec(complex(), rows), cols),
            prop::collection::vec(0.0..4.0f64, cols),
        )
            .prop_map(move |(w, columns, f)| {
                let grid = (0..rows).map(|k| k as f64).collect();
                let lambda = vec![c(0.0, 0.0); cols];
                (FrameMatrix::from_columns(grid, w, columns, lambda).unwrap(), f)
            })
    })
}

fn weighted_spectral(m: &DMatrix<Complex64>, w_in: &[f64], w_out: &[f64]) -> f64 {
    let x = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (w_out[i].sqrt() / w_in[j].sqrt()));
    x.singular_values().iter().copied().fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_roots_solve_the_quadratic(a in complex(), b in complex(), c0 in complex(), z in complex()) {
        prop_assume!(a.norm() > 0.1);
        let cf = CoefficientField::polynomial(vec![a], vec![b], vec![c0], (0.0, 1.0)).unwrap();
        prop_assume!((z - parabola_vertex(&cf).unwrap()).norm() > 1e-6);
        let (r1, r2) = quadratic_roots(&cf, z).unwrap();
        for r in [r1, r2] {
            let scale = a.norm() * r.norm_sqr() + b.norm() * r.norm() + c0.norm() + z.norm();
            prop_assert!((a * r * r + b * r + c0 - z).norm() <= 1e-12 * scale);
        }
        prop_assert!(r1.im <= r2.im);
    }

    #[test]
    fn smallest_singular_value_is_one_lipschitz(m in matrix(6), z1 in complex(), z2 in complex()) {
        let shift = |z: Complex64| {
            let mut b = m.clone();
            for k in 0..6 { b[(k, k)] -= z; }
            b
        };
        let (s1, _, ok1) = smallest_singular_value(&shift(z1));
        let (s2, _, ok2) = smallest_singular_value(&shift(z2));
        prop_assume!(ok1 && ok2);
        prop_assert!((s1 - s2).abs() <= (z1 - z2).norm() + 1e-9);
        let exact = shift(z1).singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!((s1 - exact).abs() <= 1e-8 * (1.0 + exact));
    }

    #[test]
    fn regularized_inverse_is_bounded((fr, _) in frame(), lg in -8.0..1.0f64) {
        let delta = 10f64.powf(lg);
        let inv = regularized_inverse(&fr, delta).unwrap();
        let ones = vec![1.0; fr.columns()];
        prop_assert!(weighted_spectral(&inv.matrix, &fr.weights, &ones) <= delta.powf(-0.5) * (1.0 + 1e-10));
        let ef = &fr.e * &inv.matrix;
        prop_assert!(weighted_spectral(&ef, &fr.weights, &fr.weights) <= 1.0 + 1e-10);
    }

    #[test]
    fn quantization_of_nonnegative_symbols_is_nonnegative((fr, f) in frame()) {
        let q = quantize(&fr, &f).unwrap();
        prop_assert!(smallest_weighted_eigenvalue(&q, &fr.weights).unwrap() >= -1e-12);
    }

    #[test]
    fn line_fit_recovers_lines(slope in -5.0..5.0f64, icpt in -5.0..5.0f64, n in 4usize..30) {
        let x = linspace(0.1, 3.0, n);
        let y: Vec<f64> = x.iter().map(|x| slope * x + icpt).collect();
        let fit = linear_fit(&x, &y).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - icpt).abs() < 1e-9);
    }

    #[test]
    fn series_product_inverts(v in prop::collection::vec(complex(), 1..10), w in prop::collection::vec(complex(), 1..10)) {
        let len = v.len().max(w.len());
        let mut a = Series::zeros(len);
        let mut b = Series::zeros(len);
        for (j, x) in v.iter().enumerate() { a.set_coeff(j, *x); }
        for (j, x) in w.iter().enumerate() { b.set_coeff(j, *x); }
        prop_assume!(b.coeff(0).norm() > 0.5);
        let back = (&a * &b).div(&b).unwrap();
        for j in 0..len {
            prop_assert!((back.coeff(j) - a.coeff(j)).norm() <= 1e-6 * (1.0 + a.max_abs()));
        }
    }

    #[test]
    fn gaussian_overlap_is_hermitian(u1 in -1.0..1.0f64, u2 in -1.0..1.0f64, x1 in -1.0..1.0f64, x2 in -1.0..1.0f64,
                                     k1 in -1.0..1.0f64, k2 in -1.0..1.0f64, h in 0.01..0.5f64) {
        let (ka, kb) = (c(-1.0, k1), c(-0.5, k2));
        let ab = gaussian_overlap(u1, x1, ka, u2, x2, kb, h);
        let ba = gaussian_overlap(u2, x2, kb, u1, x1, ka, h);
        prop_assert!((ab - ba.conj()).norm() <= 1e-12 * (1.0 + ab.norm()));
    }

    #[test]
    fn region_mask_matches_the_bracket_sign(lo in -2.0..0.0f64, span in 0.5..3.0f64) {
        let cf = CoefficientField::complex_airy((-10.0, 10.0));
        let u = linspace(lo, lo + span, 7);
        let xi = linspace(-1.0, 1.0, 9);
        let mask = region_mask(&cf, &u, &xi).unwrap();
        let mut count = 0;
        for &x in &xi {
            count += u.len() * usize::from(x < 0.0);
        }
        prop_assert_eq!(mask.count_in_omega(), count);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transform_adjoint_identity(h in 0.05..0.3f64, seed in prop::collection::vec(complex(), 24)) {
        let cf = CoefficientField::complex_airy((-10.0, 10.0));
        let x = Grid1D::new(-3.0, 3.0, 301).unwrap();
        let grid = PhaseSpaceGrid::clipped(&cf, &linspace(-0.5, 0.5, 4), &linspace(-1.0, -0.4, 3)).unwrap();
        let t = Transform::new(TransformKernel { kind: KernelKind::Gaussian, h }, Some(&cf), grid, &x).unwrap();
        let phi: Vec<Complex64> = seed[..12].to_vec();
        let f: Vec<Complex64> = (0..301).map(|k| seed[12 + k % 12] * (1.0 + 0.01 * k as f64)).collect();
        let tphi = t.synthesize(&phi).unwrap();
        let tf = t.analyze(&f).unwrap();
        let lhs: Complex64 = tphi.iter().zip(&f).zip(&t.x_weights).map(|((a, b), w)| a.conj() * b * *w).sum();
        let rhs: Complex64 = phi.iter().zip(&tf).zip(&t.grid.weights).map(|((a, b), w)| a.conj() * b * *w).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn cross_gram_is_symmetric(h in 0.05..0.3f64, shift in 0.3..1.0f64) {
        let cf = CoefficientField::complex_airy((-10.0, 10.0));
        let x = Grid1D::new(-4.0, 4.0, 401).unwrap();
        let xi = linspace(-0.8, -0.4, 3);
        let kern = TransformKernel { kind: KernelKind::Gaussian, h };
        let tu = Transform::new(kern, Some(&cf), PhaseSpaceGrid::clipped(&cf, &linspace(-0.4, -0.1, 3), &xi).unwrap(), &x).unwrap();
        let tv = Transform::new(kern, Some(&cf), PhaseSpaceGrid::clipped(&cf, &linspace(-0.1 + shift, 0.2 + shift, 3), &xi).unwrap(), &x).unwrap();
        let a = cross_gram_norm(&tu, &tv).unwrap();
        let b = cross_gram_norm(&tv, &tu).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
        prop_assert!(a <= 1.0 + 1e-10);
    }
}

#[test]
fn lipschitz_constant_is_attained_on_normal_matrices() {
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 0.0), c(3.0, 0.0)]));
    let s = |z: Complex64| {
        let mut b = d.clone();
        b[(0, 0)] -= z;
        b[(1, 1)] -= z;
        smallest_singular_value(&b).0
    };
    assert!(((s(c(0.5, 0.0)) - s(c(0.0, 0.0))) - 0.5).abs() < 1e-12);
}
