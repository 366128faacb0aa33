//! Frame quantization of a nonnegative symbol and the regularized inverse.

use nalgebra::DVector;
use num_complex::Complex64;
use pseudomode::frame::{quantize, reconstruct, smallest_weighted_eigenvalue, FrameMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pseudomode::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (rows, cols) = (20, 30);
    let c = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let columns = (0..cols).map(|_| (0..rows).map(|_| c(&mut rng)).collect()).collect();
    let frame = FrameMatrix::from_columns(
        (0..rows).map(|k| k as f64).collect(),
        vec![1.0 / rows as f64; rows],
        columns,
        vec![Complex64::new(0.0, 0.0); cols],
    )?;
    let symbol: Vec<f64> = (0..cols).map(|k| (k as f64 / 5.0).sin().abs()).collect();
    let q = quantize(&frame, &symbol)?;
    println!("smallest eigenvalue of Q(f): {:.3e}", smallest_weighted_eigenvalue(&q, &frame.weights)?);
    let f = DVector::from_fn(rows, |_, _| c(&mut rng));
    for delta in [1e-1, 1e-3, 1e-6] {
        let (phi, err) = reconstruct(&frame, &f, delta)?;
        println!("delta {delta:e}: |phi| {:.3} |f - E phi| {:.3e}", phi.norm(), err);
    }
    Ok(())
}
