use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::{smooth_step, CutoffSpec};
use super::phase::{
    choose_delta, require_omega, transport_recursion, ContinuedPhase, CutoffRequest, PhaseSeries,
    DEFAULT_DEGREE,
};
use crate::error::{Error, Result};
use crate::grid::{linspace, trapezoid_weights, weighted_norm};
use crate::symbol::{principal_symbol, twist_curvature, CoefficientField, PhasePoint};

/// Default number of samples per mode.
pub const DEFAULT_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Interior,
    Rough,
    Gaussian,
    Boundary,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeOptions {
    pub degree: usize,
    pub points: usize,
    pub cutoff: CutoffRequest,
    /// Upper bound on the spacing of continuation nodes.
    pub max_step: f64,
}

impl Default for ModeOptions {
    fn default() -> Self {
        ModeOptions {
            degree: DEFAULT_DEGREE,
            points: DEFAULT_POINTS,
            cutoff: CutoffRequest::default(),
            max_step: 0.5,
        }
    }
}

/// Analytic evaluator of a mode and its first two derivatives.
#[derive(Debug, Clone)]
pub enum Profile {
    /// `prefactor * chi(x - origin) * exp(sum_m h^m psi_m(x - origin))`.
    Phase {
        origin: f64,
        phase: Arc<ContinuedPhase>,
        cutoff: CutoffSpec,
        h: f64,
        prefactor: f64,
    },
    /// `h^{-alpha/2} exp(i xi x / h) bump((x - u) / h^alpha)`.
    Rough { u: f64, xi: f64, h: f64, alpha: f64 },
    /// `h^{-1/4} exp((i xi s + k s^2 / 2) / h)` with `s = x - u`.
    Gaussian { u: f64, xi: f64, k: Complex64, h: f64 },
    Combined(Vec<(Complex64, Arc<Profile>)>),
}

const ZERO3: [Complex64; 3] = [Complex64 { re: 0.0, im: 0.0 }; 3];

/// Bump equal to 1 on `|y| <= 1` and 0 on `|y| >= 2`.
fn bump(y: f64) -> (f64, f64, f64) {
    let (v, d1, d2) = smooth_step(y.abs() - 1.0);
    (v, d1 * y.signum(), d2)
}

impl Profile {
    pub fn eval(&self, x: f64) -> Result<[Complex64; 3]> {
        match self {
            Profile::Phase { origin, phase, cutoff, h, prefactor } => {
                let s = x - origin;
                let (c0, c1, c2) = cutoff.eval(s);
                if c0 == 0.0 && c1 == 0.0 && c2 == 0.0 {
                    return Ok(ZERO3);
                }
                let [p0, p1, p2] = phase.combined(s, *h)?;
                let e = p0.exp() * *prefactor;
                Ok([
                    e * c0,
                    e * (p1 * c0 + c1),
                    e * ((p2 + p1 * p1) * c0 + p1 * (2.0 * c1) + c2),
                ])
            }
            Profile::Rough { u, xi, h, alpha } => {
                let scale = h.powf(*alpha);
                let (b0, b1, b2) = bump((x - u) / scale);
                if b0 == 0.0 && b1 == 0.0 && b2 == 0.0 {
                    return Ok(ZERO3);
                }
                let wave = Complex64::new(0.0, xi * x / h).exp() * h.powf(-alpha / 2.0);
                let k = Complex64::new(0.0, xi / h);
                Ok([
                    wave * b0,
                    wave * (k * b0 + b1 / scale),
                    wave * (k * k * b0 + k * (2.0 * b1 / scale) + b2 / (scale * scale)),
                ])
            }
            Profile::Gaussian { u, xi, k, h } => {
                let s = x - u;
                let slope = Complex64::new(0.0, *xi) + k * s;
                let g = ((Complex64::new(0.0, xi * s) + k * (s * s / 2.0)) / h).exp() * h.powf(-0.25);
                Ok([g, g * slope / *h, g * (slope * slope / (h * h) + k / *h)])
            }
            Profile::Combined(parts) => {
                let mut out = ZERO3;
                for (w, p) in parts {
                    let v = p.eval(x)?;
                    for q in 0..3 {
                        out[q] += w * v[q];
                    }
                }
                Ok(out)
            }
        }
    }
}

/// A constructed approximate eigenfunction with samples of `f, f', f''`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pseudomode {
    pub kind: ModeKind,
    pub h: f64,
    pub n: usize,
    pub u: f64,
    pub xi: Complex64,
    pub z: Complex64,
    pub phase: Option<PhaseSeries>,
    pub cutoff: Option<CutoffSpec>,
    pub grid: Vec<f64>,
    pub f: Vec<Complex64>,
    pub df: Vec<Complex64>,
    pub d2f: Vec<Complex64>,
    #[serde(skip)]
    pub profile: Option<Arc<Profile>>,
}

/// Metadata shared by every mode constructor.
pub(crate) struct ModeMeta {
    pub kind: ModeKind,
    pub h: f64,
    pub n: usize,
    pub u: f64,
    pub xi: Complex64,
    pub z: Complex64,
    pub phase: Option<PhaseSeries>,
    pub cutoff: Option<CutoffSpec>,
}

impl Pseudomode {
    pub(crate) fn sample(meta: ModeMeta, profile: Profile, grid: Vec<f64>) -> Result<Self> {
        let mut f = Vec::with_capacity(grid.len());
        let mut df = Vec::with_capacity(grid.len());
        let mut d2f = Vec::with_capacity(grid.len());
        for &x in &grid {
            let [v0, v1, v2] = profile.eval(x)?;
            if !(v0.is_finite() && v1.is_finite() && v2.is_finite()) {
                return Err(Error::Numeric(format!("mode sample at x = {x} is not finite")));
            }
            f.push(v0);
            df.push(v1);
            d2f.push(v2);
        }
        Ok(Pseudomode {
            kind: meta.kind,
            h: meta.h,
            n: meta.n,
            u: meta.u,
            xi: meta.xi,
            z: meta.z,
            phase: meta.phase,
            cutoff: meta.cutoff,
            grid,
            f,
            df,
            d2f,
            profile: Some(Arc::new(profile)),
        })
    }

    /// `(f, f', f'')` at an arbitrary point.
    pub fn eval(&self, x: f64) -> Result<[Complex64; 3]> {
        match &self.profile {
            Some(p) => p.eval(x),
            None => Err(Error::Precondition("mode has no analytic evaluator (deserialized)".into())),
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.grid)
    }

    /// Trapezoid `L^2` norm of the samples.
    pub fn norm(&self) -> f64 {
        weighted_norm(&self.f, &self.weights())
    }

    /// Sampled span `[x_first, x_last]`.
    pub fn span(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    /// `L^2` distance to another mode on a uniform grid covering both spans.
    pub fn distance(&self, other: &Pseudomode, points: usize) -> Result<f64> {
        let (a0, a1) = self.span();
        let (b0, b1) = other.span();
        let grid = linspace(a0.min(b0), a1.max(b1), points);
        let diff: Vec<Complex64> = grid
            .iter()
            .map(|&x| Ok(self.eval(x)?[0] - other.eval(x)?[0]))
            .collect::<Result<_>>()?;
        Ok(weighted_norm(&diff, &trapezoid_weights(&grid)))
    }

    /// Writes `s, re_f, im_f, abs_f` with `s` the offset from the anchor point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "re_f", "im_f", "abs_f"])?;
        for (x, f) in self.grid.iter().zip(&self.f) {
            w.write_record([
                (x - self.u).to_string(),
                f.re.to_string(),
                f.im.to_string(),
                f.norm().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Phase data for one `(u, xi, n)` that does not depend on `h`, so that sweeps over
/// `h` reuse it.
#[derive(Debug, Clone)]
pub struct InteriorModel {
    pub point: PhasePoint,
    pub n: usize,
    pub z: Complex64,
    pub series: PhaseSeries,
    pub phase: Arc<ContinuedPhase>,
    pub cutoff: CutoffSpec,
    pub points: usize,
}

impl InteriorModel {
    pub fn new(cf: &CoefficientField, p: PhasePoint, n: usize, opts: &ModeOptions) -> Result<Self> {
        let z = require_omega(cf, p)?;
        let series = transport_recursion(cf, p, n, opts.degree)?;
        let reach = opts.cutoff.delta0;
        let phase = ContinuedPhase::build(
            cf,
            p.u,
            Complex64::new(p.xi, 0.0),
            n,
            opts.degree,
            (-reach, reach),
            opts.max_step,
        )?;
        let req = CutoffRequest { one_sided: false, ..opts.cutoff };
        let cutoff = choose_delta(&phase, &req)?;
        Ok(InteriorModel {
            point: p,
            n,
            z,
            series,
            phase: Arc::new(phase),
            cutoff,
            points: opts.points,
        })
    }

    pub fn mode(&self, h: f64) -> Result<Pseudomode> {
        check_h(h)?;
        let (u, d) = (self.point.u, self.cutoff.delta);
        let profile = Profile::Phase {
            origin: u,
            phase: self.phase.clone(),
            cutoff: self.cutoff,
            h,
            prefactor: h.powf(-0.25),
        };
        let meta = ModeMeta {
            kind: ModeKind::Interior,
            h,
            n: self.n,
            u,
            xi: Complex64::new(self.point.xi, 0.0),
            z: self.z,
            phase: Some(self.series.clone()),
            cutoff: Some(self.cutoff),
        };
        Pseudomode::sample(meta, profile, linspace(u - d, u + d, self.points))
    }
}

pub(crate) fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("semiclassical parameter h = {h} must lie in (0, 1]")))
    }
}

/// Interior pseudomode `h^{-1/4} chi(s) exp(psi(s))` about `(u, xi)` to transport order `n`.
pub fn assemble_mode(
    cf: &CoefficientField,
    p: PhasePoint,
    h: f64,
    n: usize,
    opts: &ModeOptions,
) -> Result<Pseudomode> {
    check_h(h)?;
    InteriorModel::new(cf, p, n, opts)?.mode(h)
}

/// Localized plane wave with bump width `h^{1/2}`.
pub fn rough_mode(cf: &CoefficientField, p: PhasePoint, h: f64, points: usize) -> Result<Pseudomode> {
    check_h(h)?;
    let z = principal_symbol(cf, p)?;
    let alpha = 0.5;
    let r = 2.0 * h.powf(alpha);
    cf.check(p.u - r)?;
    cf.check(p.u + r)?;
    let meta = ModeMeta {
        kind: ModeKind::Rough,
        h,
        n: 0,
        u: p.u,
        xi: Complex64::new(p.xi, 0.0),
        z,
        phase: None,
        cutoff: None,
    };
    let profile = Profile::Rough { u: p.u, xi: p.xi, h, alpha };
    Pseudomode::sample(meta, profile, linspace(p.u - r, p.u + r, points))
}

/// Gaussian `h^{-1/4} exp((i xi s + k s^2/2)/h)` with `k` the twist curvature.
pub fn gaussian_mode(cf: &CoefficientField, p: PhasePoint, h: f64, points: usize) -> Result<Pseudomode> {
    check_h(h)?;
    let z = principal_symbol(cf, p)?;
    let k = twist_curvature(cf, p)?;
    if k.re >= 0.0 {
        return Err(Error::NotInOmega { u: p.u, xi: p.xi });
    }
    let (lo, hi) = cf.domain();
    let r = 9.0 * (h / -k.re).sqrt();
    let meta = ModeMeta {
        kind: ModeKind::Gaussian,
        h,
        n: 0,
        u: p.u,
        xi: Complex64::new(p.xi, 0.0),
        z,
        phase: None,
        cutoff: None,
    };
    let profile = Profile::Gaussian { u: p.u, xi: p.xi, k, h };
    Pseudomode::sample(meta, profile, linspace((p.u - r).max(lo), (p.u + r).min(hi), points))
}
