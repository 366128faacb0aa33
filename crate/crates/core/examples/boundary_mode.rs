//! Boundary pseudomodes at a complex covector and the parabola test for a spectral value.

use num_complex::Complex64;
use pseudomode::boundary::{
    boundary_band, exit_condition, inside_parabola, parabola_vertex, BoundaryCovector, BoundaryModel,
};
use pseudomode::grid::residual_triple;
use pseudomode::symbol::CoefficientField;
use pseudomode::wkb::{CutoffRequest, ModeOptions};

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::polynomial(
        vec![1.0.into()],
        vec![Complex64::new(0.0, -1.0)],
        vec![0.0.into(), Complex64::new(0.0, 0.3)],
        (0.0, 3.0),
    )?;
    println!("exit condition {} band {:?} vertex {:.3}", exit_condition(&cf)?, boundary_band(&cf)?, parabola_vertex(&cf)?);
    for z in [Complex64::new(0.5, 0.0), Complex64::new(-1.0, 0.0)] {
        println!("z = {z}: inside parabola {}", inside_parabola(&cf, z)?);
    }
    let opts = ModeOptions {
        cutoff: CutoffRequest { delta0: 2.0, one_sided: true, ..Default::default() },
        ..Default::default()
    };
    let model = BoundaryModel::new(&cf, BoundaryCovector::new(Complex64::new(0.0, 0.3))?, 1, &opts)?;
    for h in [0.05, 0.025, 0.0125] {
        let r = residual_triple(&model.mode(h)?, &cf)?;
        println!("h {h}: |Qf|/|f| {:.3e} |Pf-xi f|/|f| {:.3e} |Lf-zf|/|f| {:.3e}", r.r_q, r.r_p, r.r_l);
    }
    Ok(())
}
