//! Boundedness of the profile integral for a general distortion `kappa(xi)`.

use num_complex::Complex64;
use pseudomode::fbi::{generalized_kappa_check, KappaBounds};

fn main() -> pseudomode::Result<()> {
    let saturating = |xi: f64| Complex64::new(xi / (1.0 + xi), 0.3);
    let bounds = KappaBounds { alpha0: 1.0, alpha_inf: 0.0, c0: 2.0, c_inf: 2.0 };
    for h in [1e-1, 1e-2, 1e-3] {
        let r = generalized_kappa_check(&saturating, &bounds, 1.0, &[h])?;
        println!("h {h}: bounded {} sup {:.5} over {} probes", r.bounded, r.sup, r.values.len());
    }
    Ok(())
}
