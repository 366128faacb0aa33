//! Cross-Gram norm of Gaussian FBI transforms over spatially disjoint phase-space sets.

use pseudomode::fbi::{asymptotic_orthogonality, KernelKind, PhaseSpaceGrid, Transform, TransformKernel};
use pseudomode::grid::{linear_fit, linspace, Grid1D};
use pseudomode::symbol::CoefficientField;

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::complex_airy((-10.0, 10.0));
    let x = Grid1D::new(-6.0, 6.0, 3001)?;
    let xi = linspace(-0.3, -0.15, 6);
    let u = PhaseSpaceGrid::clipped(&cf, &linspace(-0.6, -0.25, 5), &xi)?;
    let v = PhaseSpaceGrid::clipped(&cf, &linspace(0.25, 0.6, 5), &xi)?;
    let (mut inv_h, mut logs) = (Vec::new(), Vec::new());
    for h in [0.2, 0.15, 0.1, 0.075, 0.05] {
        let k = TransformKernel { kind: KernelKind::Gaussian, h };
        let n = asymptotic_orthogonality(&Transform::new(k, Some(&cf), u.clone(), &x)?, &Transform::new(k, Some(&cf), v.clone(), &x)?)?;
        println!("h {h}: cross-Gram norm {n:.3e}");
        inv_h.push(1.0 / h);
        logs.push(n.ln());
    }
    let fit = linear_fit(&inv_h, &logs)?;
    println!("log norm vs 1/h: slope {:.4} r2 {:.4}", fit.slope, fit.r2);
    Ok(())
}
