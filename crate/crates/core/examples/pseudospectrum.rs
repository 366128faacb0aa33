//! Smallest singular value of `L_h - z` along a line crossing the symbol image.

use num_complex::Complex64;
use pseudomode::grid::{discretize, resolvent_map, BoundaryCondition, Grid1D};

use pseudomode::symbol::CoefficientField;

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::complex_airy((-2.0, 2.0));
    let bc = (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet);
    let zs: Vec<Complex64> = (0..9).map(|k| Complex64::new(0.5, -2.0 + 0.5 * k as f64)).collect();
    for h in [0.1, 0.05] {
        let op = discretize(&cf, h, Grid1D::new(-2.0, 2.0, 200)?, bc)?;
        let cells = resolvent_map(&op, &zs);
        let row: Vec<String> = cells.iter().map(|c| format!("{:.1e}", c.s_min)).collect();
        println!("h {h}: {}", row.join(" "));
    }
    Ok(())
}
