//! Interior pseudomodes: eikonal and transport phases, cutoffs, and the assembled
//! approximate eigenfunctions together with their rough and Gaussian relatives.

mod cutoff;
mod mode;
mod phase;

pub use cutoff::{smooth_step, CutoffSpec};
pub use mode::{
    assemble_mode, gaussian_mode, rough_mode, InteriorModel, ModeKind, ModeOptions, Profile,
    Pseudomode, DEFAULT_POINTS,
};
pub use phase::{
    choose_delta, eikonal_phase, phase_defects, transport_recursion, ContinuedPhase,
    CutoffRequest, PhaseSeries, DEFAULT_DEGREE,
};
pub(crate) use mode::{check_h, ModeMeta};
pub(crate) use phase::phase_series;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Leading constant of `int s^{2 beta} G(s) exp(-F(s) s^2 / h) ds ~ c h^{beta + 1/2}`,
/// namely `G(0) Gamma(beta + 1/2) / F(0)^{beta + 1/2}`.
pub fn laplace_constant(beta: u32, g0: f64, f0: f64) -> Result<f64> {
    if !(f0 > 0.0) {
        return Err(Error::Precondition(format!("decay rate must be positive, got {f0}")));
    }
    let e = beta as f64 + 0.5;
    Ok(g0 * gamma(e) / f0.powf(e))
}

/// One-sided version: `int_0^inf s^m G(s) exp(-F(s) s / h) ds ~ c h^{m + 1}` with
/// `c = G(0) Gamma(m + 1) / F(0)^{m + 1}`; `m` must be even.
pub fn laplace_constant_boundary(m: u32, g0: f64, f0: f64) -> Result<f64> {
    if !(f0 > 0.0) {
        return Err(Error::Precondition(format!("decay rate must be positive, got {f0}")));
    }
    if m % 2 != 0 {
        return Err(Error::Precondition(format!("exponent {m} must be even")));
    }
    let e = m as f64 + 1.0;
    Ok(g0 * gamma(e) / f0.powf(e))
}
