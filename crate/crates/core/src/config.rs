//! JSON run configuration for the command-line front end.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{default_h_sweep, linspace, BoundaryCondition};
use crate::symbol::CoefficientField;
use crate::wkb::{CutoffRequest, ModeOptions, DEFAULT_DEGREE, DEFAULT_POINTS};

/// `[lo, hi, count]`.
pub type Axis = (f64, f64, usize);

pub fn axis_points(a: &Axis) -> Vec<f64> {
    linspace(a.0, a.1, a.2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    ComplexAiry,
    DaviesRotated,
    AdvectionExit,
}

/// Ascending-power coefficient lists of `a`, `b`, `c`; each entry is `[re, im]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(Builtin),
    Polynomial(PolynomialSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeSettings {
    pub points: usize,
    pub degree: usize,
    pub delta0: f64,
    pub halvings: usize,
    pub probes: usize,
    pub max_step: f64,
}

impl Default for ModeSettings {
    fn default() -> Self {
        let c = CutoffRequest::default();
        ModeSettings {
            points: DEFAULT_POINTS,
            degree: DEFAULT_DEGREE,
            delta0: c.delta0,
            halvings: c.halvings,
            probes: c.probes,
            max_step: ModeOptions::default().max_step,
        }
    }
}

impl ModeSettings {
    pub fn options(&self) -> ModeOptions {
        ModeOptions {
            degree: self.degree,
            points: self.points,
            cutoff: CutoffRequest {
                delta0: self.delta0,
                halvings: self.halvings,
                probes: self.probes,
                one_sided: false,
            },
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    Interior,
    Rough,
    Gaussian,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionBlock {
    pub u: Axis,
    pub xi: Axis,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeBlock {
    pub kind: ModeChoice,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub boundary_xi: Option<Complex64>,
    pub h: f64,
    #[serde(default)]
    pub n: usize,
}

fn default_robin() -> (Complex64, Complex64) {
    (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
}

fn default_t_range() -> (f64, f64) {
    (-3.0, 3.0)
}

fn default_curve_points() -> usize {
    241
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryBlock {
    /// `(coef_deriv, coef_value)`.
    #[serde(default = "default_robin")]
    pub robin: (Complex64, Complex64),
    pub z: Complex64,
    pub h: f64,
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_t_range")]
    pub t_range: (f64, f64),
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub kind: ModeChoice,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub boundary_xi: Option<Complex64>,
    #[serde(default)]
    pub robin: Option<(Complex64, Complex64)>,
    #[serde(default)]
    pub z: Option<Complex64>,
}

fn dirichlet_pair() -> (BoundaryCondition, BoundaryCondition) {
    (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsgridBlock {
    pub h: f64,
    pub m: usize,
    #[serde(default = "dirichlet_pair")]
    pub bc: (BoundaryCondition, BoundaryCondition),
    pub re: Axis,
    pub im: Axis,
    #[serde(default)]
    pub overlay: Option<RegionBlock>,
}

fn default_c6() -> f64 {
    1.0
}

fn default_s() -> Vec<f64> {
    vec![-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0, 1000.0]
}

fn default_t() -> Vec<f64> {
    vec![1e-3, 1e-6, 1e-9, 1e-12]
}

fn default_kappa() -> Complex64 {
    Complex64::new(1.0, 0.5)
}

fn default_fbi_h() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

fn default_band() -> (f64, f64) {
    (0.5, 1.5)
}

fn one() -> f64 {
    1.0
}

fn default_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthogonalityBlock {
    pub u_left: Axis,
    pub u_right: Axis,
    pub xi: Axis,
    pub h: Vec<f64>,
    pub x: Axis,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbiBlock {
    #[serde(default = "default_c6")]
    pub c6: f64,
    #[serde(default = "default_s")]
    pub s: Vec<f64>,
    #[serde(default = "default_t")]
    pub t: Vec<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: Complex64,
    #[serde(default = "default_fbi_h")]
    pub h: Vec<f64>,
    #[serde(default = "default_band")]
    pub band: (f64, f64),
    #[serde(default = "one")]
    pub refine: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub orthogonality: Option<OrthogonalityBlock>,
}

fn default_deltas() -> Vec<f64> {
    vec![1e-2, 1e-4, 1e-6, 1e-8]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveBlock {
    pub h: f64,
    pub m: usize,
    #[serde(default = "dirichlet_pair")]
    pub bc: (BoundaryCondition, BoundaryCondition),
    pub u: Vec<f64>,
    pub xi: Vec<f64>,
    #[serde(default)]
    pub n: usize,
    pub t: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorSpec,
    pub domain: (f64, f64),
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_h_sweep")]
    pub h_sweep: Vec<f64>,
    #[serde(default)]
    pub orders: Option<Vec<usize>>,
    #[serde(default)]
    pub modes: ModeSettings,
    #[serde(default)]
    pub region: Option<RegionBlock>,
    #[serde(default)]
    pub mode: Option<ModeBlock>,
    #[serde(default)]
    pub boundary: Option<BoundaryBlock>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub psgrid: Option<PsgridBlock>,
    #[serde(default)]
    pub fbi: Option<FbiBlock>,
    #[serde(default)]
    pub evolve: Option<EvolveBlock>,
}

fn bad(msg: String) -> Error {
    Error::Config(msg)
}

fn check_h(name: &str, h: f64) -> Result<()> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(bad(format!("{name}: h = {h} must lie in (0, 1]")))
    }
}

fn check_axis(name: &str, a: &Axis) -> Result<()> {
    if !(a.0.is_finite() && a.1.is_finite()) || a.2 == 0 {
        return Err(bad(format!("{name}: axis [{}, {}, {}] is invalid", a.0, a.1, a.2)));
    }
    if a.2 > 1 && !(a.1 > a.0) {
        return Err(bad(format!("{name}: axis with {} points needs lo < hi", a.2)));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} = {v} must be positive and finite")))
    }
}

fn check_bc(name: &str, bc: &(BoundaryCondition, BoundaryCondition)) -> Result<()> {
    for b in [bc.0, bc.1] {
        if let BoundaryCondition::Robin { coef_deriv, coef_value } = b {
            if coef_deriv.norm() == 0.0 && coef_value.norm() == 0.0 {
                return Err(bad(format!("{name}: Robin coefficients are both zero")));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn orders(&self) -> Vec<usize> {
        self.orders.clone().unwrap_or_else(|| vec![0, 1, 2])
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(bad(format!("domain [{lo}, {hi}] must be a finite interval")));
        }
        if let OperatorSpec::Polynomial(p) = &self.operator {
            if p.a.is_empty() || p.b.is_empty() || p.c.is_empty() {
                return Err(bad("polynomial coefficient lists must be nonempty".into()));
            }
        }
        if self.h_sweep.is_empty() {
            return Err(bad("h_sweep is empty".into()));
        }
        for &h in &self.h_sweep {
            check_h("h_sweep", h)?;
        }
        let m = &self.modes;
        check_positive("modes.delta0", m.delta0)?;
        check_positive("modes.max_step", m.max_step)?;
        if m.points < 16 || m.probes == 0 || m.degree < 4 {
            return Err(bad("modes needs points >= 16, probes >= 1 and degree >= 4".into()));
        }
        if let Some(r) = &self.region {
            check_axis("region.u", &r.u)?;
            check_axis("region.xi", &r.xi)?;
        }
        if let Some(b) = &self.mode {
            check_h("mode", b.h)?;
        }
        if let Some(b) = &self.boundary {
            check_h("boundary", b.h)?;
            if b.curve_points < 2 || !(b.t_range.1 > b.t_range.0) {
                return Err(bad("boundary curve needs t_range lo < hi and at least 2 points".into()));
            }
        }
        if let Some(b) = &self.psgrid {
            check_h("psgrid", b.h)?;
            for (name, a) in [("psgrid.re", &b.re), ("psgrid.im", &b.im)] {
                if a.2 > 0 {
                    check_axis(name, a)?;
                }
            }
            check_bc("psgrid.bc", &b.bc)?;
            if let Some(o) = &b.overlay {
                check_axis("psgrid.overlay.u", &o.u)?;
                check_axis("psgrid.overlay.xi", &o.xi)?;
            }
        }
        if let Some(b) = &self.fbi {
            check_positive("fbi.c6", b.c6)?;
            check_positive("fbi.refine", b.refine)?;
            for &h in &b.h {
                check_h("fbi.h", h)?;
            }
            for &t in &b.t {
                check_positive("fbi.t", t)?;
            }
            if b.samples == 0 {
                return Err(bad("fbi.samples must be positive".into()));
            }
            if let Some(o) = &b.orthogonality {
                check_axis("fbi.orthogonality.u_left", &o.u_left)?;
                check_axis("fbi.orthogonality.u_right", &o.u_right)?;
                check_axis("fbi.orthogonality.xi", &o.xi)?;
                check_axis("fbi.orthogonality.x", &o.x)?;
                for &h in &o.h {
                    check_h("fbi.orthogonality.h", h)?;
                }
            }
        }
        if let Some(b) = &self.evolve {
            check_h("evolve", b.h)?;
            check_bc("evolve.bc", &b.bc)?;
            if b.u.is_empty() || b.xi.is_empty() {
                return Err(bad("evolve roster needs at least one u and one xi".into()));
            }
            for &t in &b.t {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(bad(format!("evolve.t = {t} must be nonnegative")));
                }
            }
            for &d in &b.deltas {
                check_positive("evolve.deltas", d)?;
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Result<CoefficientField> {
        let d = self.domain;
        Ok(match &self.operator {
            OperatorSpec::Named(Builtin::ComplexAiry) => CoefficientField::complex_airy(d),
            OperatorSpec::Named(Builtin::DaviesRotated) => CoefficientField::davies_rotated(d),
            OperatorSpec::Named(Builtin::AdvectionExit) => CoefficientField::advection_exit(d),
            OperatorSpec::Polynomial(p) => {
                CoefficientField::polynomial(p.a.clone(), p.b.clone(), p.c.clone(), d)?.with_name("polynomial")
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtin_and_polynomial() {
        let c = RunConfig::from_json(r#"{"operator": "complex-airy", "domain": [-2, 2]}"#).unwrap();
        assert_eq!(c.operator, OperatorSpec::Named(Builtin::ComplexAiry));
        assert_eq!(c.h_sweep.len(), 6);
        let p = RunConfig::from_json(
            r#"{"operator": {"a": [[1, 0]], "b": [[0, 0]], "c": [[0, 0], [0, 1]]}, "domain": [-1, 1]}"#,
        )
        .unwrap();
        assert!(p.coefficients().is_ok());
    }

    #[test]
    fn rejects_unknown_keys() {
        let e = RunConfig::from_json(r#"{"operator": "complex-airy", "domain": [-2, 2], "colour": 1}"#);
        assert!(matches!(e, Err(Error::Config(_))));
        let e = RunConfig::from_json(
            r#"{"operator": "complex-airy", "domain": [-2, 2], "mode": {"kind": "interior", "h": 0.1, "extra": 0}}"#,
        );
        assert!(matches!(e, Err(Error::Config(_))));
        let e = RunConfig::from_json(r#"{"operator": {"a": [[1,0]], "b": [[0,0]], "c": [[0,0]], "d": []}, "domain": [0, 1]}"#);
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn validates_numbers() {
        for bad in [
            r#"{"operator": "complex-airy", "domain": [2, -2]}"#,
            r#"{"operator": "complex-airy", "domain": [-2, 2], "h_sweep": [0.5, 1.5]}"#,
            r#"{"operator": "complex-airy", "domain": [-2, 2], "modes": {"delta0": -1}}"#,
            r#"{"operator": "complex-airy", "domain": [-2, 2], "mode": {"kind": "rough", "h": 0, "xi": -1}}"#,
            r#"{"operator": "nope", "domain": [-2, 2]}"#,
        ] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
