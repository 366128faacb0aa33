//! Fitted residual orders of interior modes over a dyadic `h` sweep.

use pseudomode::grid::{default_h_sweep, order_fit, residual_triple};
use pseudomode::symbol::{CoefficientField, PhasePoint};
use pseudomode::wkb::{CutoffRequest, InteriorModel, ModeOptions};

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::complex_airy((-10.0, 10.0));
    let opts = ModeOptions { cutoff: CutoffRequest { delta0: 8.0, ..Default::default() }, ..Default::default() };
    let hs = default_h_sweep();
    for n in 0..3 {
        let model = InteriorModel::new(&cf, PhasePoint::new(0.0, -1.0), n, &opts)?;
        let r: Vec<_> = hs.iter().map(|&h| residual_triple(&model.mode(h)?, &cf)).collect::<Result<_, _>>()?;
        let fit = |f: fn(&pseudomode::grid::ResidualTriple) -> f64| order_fit(&hs, &r.iter().map(f).collect::<Vec<_>>());
        let (l, q, p) = (fit(|r| r.r_l)?, fit(|r| r.r_q)?, fit(|r| r.r_p)?);
        println!("n={n}: L slope {:.3} (r2 {:.5}), Q slope {:.3}, P slope {:.3}", l.slope, l.r2, q.slope, p.slope);
    }
    Ok(())
}
