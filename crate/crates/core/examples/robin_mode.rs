//! Combination of two boundary modes satisfying a Robin condition exactly.

use num_complex::Complex64;
use pseudomode::boundary::{RobinCondition, RobinModel};
use pseudomode::grid::residual_triple;
use pseudomode::symbol::CoefficientField;
use pseudomode::wkb::{CutoffRequest, ModeOptions};

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::advection_exit((0.0, 8.0));
    let rc = RobinCondition::new(1.0.into(), 1.0.into())?;
    let opts = ModeOptions {
        cutoff: CutoffRequest { delta0: 4.0, one_sided: true, ..Default::default() },
        ..Default::default()
    };
    let model = RobinModel::new(&cf, rc, Complex64::new(0.2, 0.0), 1, &opts)?;
    for h in [0.0625, 0.03125, 0.015625] {
        let m = model.mode(h)?;
        let r = residual_triple(&m.mode, &cf)?;
        println!("h {h}: roots {:.3} and {:.3}, bc residual {:.1e}, |Lf-zf|/|f| {:.2e}", m.roots.0, m.roots.1, m.bc_residual, r.r_l);
    }
    Ok(())
}
