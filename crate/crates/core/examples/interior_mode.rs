//! One interior pseudomode and its three relative residuals.

use pseudomode::grid::residual_triple;
use pseudomode::symbol::{CoefficientField, PhasePoint};
use pseudomode::wkb::{assemble_mode, CutoffRequest, ModeOptions};

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::complex_airy((-10.0, 10.0));
    let opts = ModeOptions { cutoff: CutoffRequest { delta0: 8.0, ..Default::default() }, ..Default::default() };
    for n in 0..3 {
        let mode = assemble_mode(&cf, PhasePoint::new(0.0, -1.0), 0.01, n, &opts)?;
        let r = residual_triple(&mode, &cf)?;
        println!("n={n} z={:.4} |Lf-zf|/|f|={:.3e} |Qf-uf|/|f|={:.3e} |Pf-xi f|/|f|={:.3e}", mode.z, r.r_l, r.r_q, r.r_p);
    }
    Ok(())
}
