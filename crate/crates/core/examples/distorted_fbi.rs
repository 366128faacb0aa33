//! Norms and near-isometry of the distorted FBI transform as `h` shrinks.

use num_complex::Complex64;
use pseudomode::fbi::{isometry_probe, DistortedLayout};

fn main() -> pseudomode::Result<()> {
    for h in [1e-1, 1e-2] {
        let layout = DistortedLayout { kappa: Complex64::new(1.0, 0.5), h, band: (0.5, 1.5), refine: 1.0 };
        let t = layout.build()?;
        let norm = t.operator_norm();
        let iso = isometry_probe(&layout, &t, 8, 1)?;
        println!(
            "h {h}: {} x {} matrix, norm {:.5} ({} Lanczos steps), |Tf|/|f| mean {:.4} spread {:.1e}",
            t.x.len(),
            t.grid.len(),
            norm.value,
            norm.iterations,
            iso.mean,
            iso.spread
        );
    }
    println!("sqrt(2 pi) = {:.5}", (2.0 * std::f64::consts::PI).sqrt());
    Ok(())
}
