//! Positive-bracket region of the complex Airy operator and its image under the symbol.

use pseudomode::grid::linspace;
use pseudomode::symbol::{region_mask, symbol_image, CoefficientField};

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::complex_airy((-4.0, 4.0));
    let mask = region_mask(&cf, &linspace(-2.0, 2.0, 41), &linspace(-2.0, 2.0, 41))?;
    let image = symbol_image(&mask, &cf)?;
    println!("{} of {} grid points in the region", mask.count_in_omega(), 41 * 41);
    for p in image.iter().step_by(97) {
        println!("u {:+.2} xi {:+.2} -> sigma {:.3}", p.u, p.xi, p.sigma);
    }
    Ok(())
}
