//! A frame of interior modes: defect, semigroup bound, approximate evolution and inclusion.

use nalgebra::DVector;
use num_complex::Complex64;
use pseudomode::frame::{
    build_frame_on, evolution_bound, evolve_approx, generator, pseudospectrum_inclusion, semigroup_bound_check,
};
use pseudomode::grid::{discretize, BoundaryCondition, Grid1D};
use pseudomode::symbol::{CoefficientField, PhasePoint};
use pseudomode::wkb::{assemble_mode, CutoffRequest, ModeOptions};

fn main() -> pseudomode::Result<()> {
    let cf = CoefficientField::complex_airy((-1.5, 1.5));
    let h = 2f64.powi(-5);
    let bc = (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet);
    let op = discretize(&cf, h, Grid1D::new(-1.5, 1.5, 200)?, bc)?;
    let opts = ModeOptions { cutoff: CutoffRequest { delta0: 1.0, ..Default::default() }, ..Default::default() };
    let mut modes = Vec::new();
    for u in [-0.3, 0.0, 0.3] {
        for xi in [-0.6, -0.45, -0.3] {
            modes.push(assemble_mode(&cf, PhasePoint::new(u, xi), h, 1, &opts)?);
        }
    }
    let frame = build_frame_on(&op, &modes)?.map_lambda(|z| -z);
    let a = generator(&op);
    let bound = evolution_bound(&a, &frame)?;
    println!("defect {:.3e}, M {}, gamma {:.3e}, condition {:.1e}", bound.epsilon, bound.m, bound.gamma, frame.condition_number());
    for r in semigroup_bound_check(&a, &frame, &bound, &[0.1, 0.5, 1.0])? {
        println!("t {}: |T_t E - E e^(Lambda t)| = {:.3e} <= {:.3e}", r.t, r.lhs, r.bound);
    }
    let mut f = frame.synthesize(&DVector::from_element(frame.columns(), Complex64::new(1.0, 0.0)))?;
    f /= Complex64::new(frame.norm_of(&f), 0.0);
    for delta in [1e-2, 1e-6] {
        let r = evolve_approx(&a, &frame, &bound, &f, delta, 0.5)?;
        println!("delta {delta:e}: error {:.3e} budget {:.3e} holds {}", r.error, r.budget, r.holds);
    }
    let inside = pseudospectrum_inclusion(&a, &frame, 2.0 * bound.epsilon)?.iter().filter(|r| r.inside).count();
    println!("{inside} of {} frame values lie in the 2*defect pseudospectrum", frame.columns());
    Ok(())
}
