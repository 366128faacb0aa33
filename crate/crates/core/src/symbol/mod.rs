//! Semiclassical principal symbol `sigma(u, xi) = a(u) xi^2 + b(u) xi + c(u)` and the
//! phase-space quantities derived from it.

mod coefficient;
mod region;

pub use coefficient::{
    CoefficientField, Exponential, FiniteDifference, Jet, JetSum, Polynomial, Sinusoid,
    ELLIPTICITY_PROBES,
};
pub use region::{multiplicity, region_mask, symbol_image, ImagePoint, RegionMask};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real phase-space point `(u, xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub fn new(u: f64, xi: f64) -> Self {
        PhasePoint { u, xi }
    }
}

/// Partial derivatives of the symbol at a phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolDerivatives {
    pub sigma_u: Complex64,
    pub sigma_xi: Complex64,
}

pub fn principal_symbol(cf: &CoefficientField, p: PhasePoint) -> Result<Complex64> {
    cf.check(p.u)?;
    let (a, b, c) = cf.values(p.u);
    Ok(a * p.xi * p.xi + b * p.xi + c)
}

/// Symbol evaluated at complex momentum, used by boundary constructions.
pub fn symbol_at(cf: &CoefficientField, u: f64, xi: Complex64) -> Result<Complex64> {
    cf.check(u)?;
    let (a, b, c) = cf.values(u);
    Ok(a * xi * xi + b * xi + c)
}

pub fn symbol_derivatives(cf: &CoefficientField, p: PhasePoint) -> Result<SymbolDerivatives> {
    cf.check(p.u)?;
    let (a, b, _) = cf.values(p.u);
    let da = cf.a.jet(p.u, 1)[1];
    let db = cf.b.jet(p.u, 1)[1];
    let dc = cf.c.jet(p.u, 1)[1];
    Ok(SymbolDerivatives {
        sigma_u: da * p.xi * p.xi + db * p.xi + dc,
        sigma_xi: a * (2.0 * p.xi) + b,
    })
}

fn bracket_from(d: &SymbolDerivatives) -> f64 {
    // {s1, s2} = ds1/du ds2/dxi - ds1/dxi ds2/du
    d.sigma_u.re * d.sigma_xi.im - d.sigma_xi.re * d.sigma_u.im
}

/// Poisson bracket `{Re sigma, Im sigma}` at `p`.
pub fn poisson_bracket(cf: &CoefficientField, p: PhasePoint) -> Result<f64> {
    Ok(bracket_from(&symbol_derivatives(cf, p)?))
}

/// `k = -i sigma_u / sigma_xi`, the complex width of the approximating Gaussian.
///
/// The real part is assembled from the same products as [`poisson_bracket`], so
/// `Re k < 0` holds exactly when the bracket is positive.
pub fn twist_curvature(cf: &CoefficientField, p: PhasePoint) -> Result<Complex64> {
    let d = symbol_derivatives(cf, p)?;
    let denom = d.sigma_xi.norm_sqr();
    if denom == 0.0 {
        return Err(Error::SingularPoint { u: p.u, xi: p.xi });
    }
    let bracket = bracket_from(&d);
    let im = -(d.sigma_u.re * d.sigma_xi.re + d.sigma_u.im * d.sigma_xi.im);
    Ok(Complex64::new(-bracket / denom, im / denom))
}

/// Whether `p` lies in the region where the bracket is positive.
pub fn in_omega(cf: &CoefficientField, p: PhasePoint) -> Result<bool> {
    Ok(poisson_bracket(cf, p)? > 0.0)
}
