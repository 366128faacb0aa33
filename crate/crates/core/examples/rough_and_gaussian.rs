//! Rough modes and the Gaussian approximation of the leading WKB mode.

use pseudomode::grid::{default_h_sweep, order_fit, residual_triple};
use pseudomode::symbol::{CoefficientField, PhasePoint};
use pseudomode::wkb::{assemble_mode, gaussian_mode, rough_mode, CutoffRequest, ModeOptions};

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::complex_airy((-10.0, 10.0));
    let p = PhasePoint::new(0.0, -1.0);
    let opts = ModeOptions { cutoff: CutoffRequest { delta0: 8.0, ..Default::default() }, ..Default::default() };
    let hs = default_h_sweep();
    let mut rough = Vec::new();
    let mut dist = Vec::new();
    for &h in &hs {
        rough.push(residual_triple(&rough_mode(&cf, p, h, 2048)?, &cf)?.r_l);
        let f = assemble_mode(&cf, p, h, 0, &opts)?;
        dist.push(f.distance(&gaussian_mode(&cf, p, h, 2048)?, 8192)?);
        println!("h {h:.5} rough residual {:.3e} |f - g| {:.3e}", rough.last().unwrap(), dist.last().unwrap());
    }
    println!("rough slope {:.3}", order_fit(&hs, &rough)?.slope);
    println!("gaussian distance slope {:.3}", order_fit(&hs, &dist)?.slope);
    Ok(())
}
