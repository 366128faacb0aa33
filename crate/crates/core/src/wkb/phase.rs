//! Eikonal and transport phases as truncated Taylor series, and their analytic
//! continuation along the real axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::series::Series;
use crate::symbol::{principal_symbol, CoefficientField, PhasePoint};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default truncation degree of the phase series.
pub const DEFAULT_DEGREE: usize = 24;

/// Phases `psi_{-1}, psi_0, ..., psi_n` as Taylor series in the offset `s` from `u`,
/// each holding `degree + 1` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeries {
    pub degree: usize,
    pub u: f64,
    pub xi: Complex64,
    pub z: Complex64,
    psi: Vec<Series>,
}

impl PhaseSeries {
    /// Number of transport terms beyond the eikonal phase, minus one (`n`).
    pub fn order(&self) -> usize {
        self.psi.len() - 2
    }

    /// `psi_m` for `m >= -1`.
    pub fn psi(&self, m: i32) -> &Series {
        &self.psi[(m + 1) as usize]
    }

    pub fn all(&self) -> &[Series] {
        &self.psi
    }

    /// `k = psi_{-1}''(0)`.
    pub fn twist(&self) -> Complex64 {
        self.psi(-1).coeff(2) * 2.0
    }
}

/// `w(x) = (z - c)/a + b^2 / (4 a^2)` about `x`.
fn w_series(a: &Series, b: &Series, c: &Series, z: Complex64) -> Result<Series> {
    let lhs = (&(-c) + z).div(a)?;
    let bb = (b * b).div(&(a * a))?;
    Ok(&lhs + &bb.scale(Complex64::new(0.25, 0.0)))
}

/// Local expansions about one point: `sqrt(w)` and `psi'_m` for `m = -1..=n`.
#[derive(Debug, Clone, PartialEq)]
struct LocalJets {
    sqrt_w: Series,
    dpsi: Vec<Series>,
}

fn local_jets(
    cf: &CoefficientField,
    x: f64,
    z: Complex64,
    root: Complex64,
    n: usize,
    len: usize,
) -> Result<LocalJets> {
    let (a, b, c) = cf.jets(x, len);
    let w = w_series(&a, &b, &c, z)?;
    let sqrt_w = w.sqrt_with_root(root)?;
    let half_b_over_a = b.div(&a)?.scale(Complex64::new(0.5, 0.0));
    let mut dpsi = Vec::with_capacity(n + 2);
    dpsi.push((&sqrt_w - &half_b_over_a).scale(I));
    // 2 a psi'_{-1} + i b = 2 i a sqrt(w)
    let denom = (&a * &sqrt_w).scale(I * 2.0);
    for m in 0..=n {
        let mut acc = dpsi[m].derivative();
        for i in 0..m {
            let j = m - 1 - i;
            acc = &acc + &(&dpsi[i + 1] * &dpsi[j + 1]);
        }
        let next = (&a * &acc).div(&denom)?;
        dpsi.push(-&next);
    }
    Ok(LocalJets { sqrt_w, dpsi })
}

fn start_root(cf: &CoefficientField, u: f64, xi: Complex64) -> Result<Complex64> {
    let (a, b, _) = cf.values(u);
    let root = xi + b / (a * 2.0);
    if root.norm() <= 1e-14 * (1.0 + xi.norm()) {
        return Err(Error::BranchPoint { s: 0.0 });
    }
    Ok(root)
}

/// Phase series about `u` for a possibly complex momentum `xi`.
pub(crate) fn phase_series(
    cf: &CoefficientField,
    u: f64,
    xi: Complex64,
    n: usize,
    degree: usize,
) -> Result<PhaseSeries> {
    cf.check(u)?;
    if degree < 3 {
        return Err(Error::Precondition(format!("series degree {degree} is below 3")));
    }
    let (a, b, c) = cf.values(u);
    let z = a * xi * xi + b * xi + c;
    let root = start_root(cf, u, xi)?;
    let jets = local_jets(cf, u, z, root, n, degree + n + 3)?;
    let psi = jets
        .dpsi
        .iter()
        .map(|d| d.integrate(Complex64::new(0.0, 0.0)).truncate(degree + 1))
        .collect();
    Ok(PhaseSeries { degree, u, xi: xi, z, psi })
}

/// Eikonal phase `psi_{-1}` about `p.u`, with `sqrt(w)(0) = xi + b/(2a)`.
pub fn eikonal_phase(cf: &CoefficientField, p: PhasePoint, degree: usize) -> Result<Series> {
    let phase = phase_series(cf, p.u, Complex64::new(p.xi, 0.0), 0, degree)?;
    Ok(phase.psi(-1).clone())
}

/// Eikonal phase followed by the transport phases `psi_0..psi_n`.
pub fn transport_recursion(
    cf: &CoefficientField,
    p: PhasePoint,
    n: usize,
    degree: usize,
) -> Result<PhaseSeries> {
    let root = start_root(cf, p.u, Complex64::new(p.xi, 0.0))?;
    let (a, _, _) = cf.values(p.u);
    if (a * root).norm() == 0.0 {
        return Err(Error::NotInOmega { u: p.u, xi: p.xi });
    }
    phase_series(cf, p.u, Complex64::new(p.xi, 0.0), n, degree)
}

/// Coefficients `phi_0..phi_{n+1}` of `exp(-psi) (L_h - z) exp(psi)` in powers of `h`,
/// rebuilt from the stored series. They vanish to degree `degree - 2` when the
/// phases solve the eikonal and transport equations.
pub fn phase_defects(cf: &CoefficientField, phase: &PhaseSeries) -> Result<Vec<Series>> {
    let len = phase.degree - 1;
    let (a, b, c) = cf.jets(phase.u, len);
    let n = phase.order() as i32;
    let d1: Vec<Series> = phase.all().iter().map(|p| p.derivative()).collect();
    let d2: Vec<Series> = d1.iter().map(|p| p.derivative()).collect();
    let idx = |m: i32| (m + 1) as usize;
    let mut out = Vec::new();
    for p in 0..=(n + 1) {
        let mut inner = Series::zeros(len);
        if p >= 1 {
            inner = &inner + &d2[idx(p - 2)];
        }
        for i in -1..=n {
            let j = p - 2 - i;
            if j >= -1 && j <= n {
                inner = &inner + &(&d1[idx(i)] * &d1[idx(j)]);
            }
        }
        let mut phi = -&(&a * &inner);
        if p - 1 <= n {
            phi = &phi - &(&b * &d1[idx(p - 1)]).scale(I);
        }
        if p == 0 {
            phi = &phi + &(&c + (-phase.z));
        }
        out.push(phi.truncate(len));
    }
    Ok(out)
}

/// Phases continued along `[s_lo, s_hi]` by chaining local Taylor expansions.
///
/// Nodes are spaced so that the tail of every local expansion stays below rounding
/// level over half the gap to the neighbouring nodes. The square-root branch at each
/// new node is the one closest to the previous node's expansion.
#[derive(Debug, Clone)]
pub struct ContinuedPhase {
    pub u: f64,
    pub xi: Complex64,
    pub z: Complex64,
    pub n: usize,
    nodes: Vec<f64>,
    values: Vec<Vec<Complex64>>,
    jets: Vec<LocalJets>,
}

/// Largest radius at which the highest three coefficients of every series contribute
/// less than `tol` relative to the series scale.
fn safe_radius(series: &[Series], tol: f64) -> f64 {
    let mut r = f64::INFINITY;
    for s in series {
        let scale = s.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
        let len = s.len();
        for j in len.saturating_sub(3).max(1)..len {
            let cj = s.coeff(j).norm();
            if cj > 0.0 {
                r = r.min((tol * scale / cj).powf(1.0 / j as f64));
            }
        }
    }
    r
}

const CONTINUATION_TOL: f64 = 1e-17;
const MIN_STEP: f64 = 1e-6;

impl ContinuedPhase {
    pub fn build(
        cf: &CoefficientField,
        u: f64,
        xi: Complex64,
        n: usize,
        degree: usize,
        range: (f64, f64),
        max_step: f64,
    ) -> Result<Self> {
        cf.check(u)?;
        let (lo, hi) = cf.domain();
        let s_lo = range.0.max(lo - u).min(0.0);
        let s_hi = range.1.min(hi - u).max(0.0);
        let (a, b, c) = cf.values(u);
        let z = a * xi * xi + b * xi + c;
        let len = degree + n + 3;
        let root = start_root(cf, u, xi)?;
        let origin = local_jets(cf, u, z, root, n, len)?;
        let zero = vec![Complex64::new(0.0, 0.0); n + 2];
        let right = Self::march(cf, u, z, n, len, &origin, zero.clone(), s_hi, max_step)?;
        let left = Self::march(cf, u, z, n, len, &origin, zero.clone(), s_lo, max_step)?;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let mut jets = Vec::new();
        for (s, v, j) in left.into_iter().rev() {
            nodes.push(s);
            values.push(v);
            jets.push(j);
        }
        nodes.push(0.0);
        values.push(zero);
        jets.push(origin);
        for (s, v, j) in right {
            nodes.push(s);
            values.push(v);
            jets.push(j);
        }
        Ok(ContinuedPhase { u, xi, z, n, nodes, values, jets })
    }

    /// Steps from the origin toward `target`, stopping early at an obstruction.
    #[allow(clippy::too_many_arguments)]
    fn march(
        cf: &CoefficientField,
        u: f64,
        z: Complex64,
        n: usize,
        len: usize,
        origin: &LocalJets,
        zero: Vec<Complex64>,
        target: f64,
        max_step: f64,
    ) -> Result<Vec<(f64, Vec<Complex64>, LocalJets)>> {
        let dir = if target < 0.0 { -1.0 } else { 1.0 };
        let mut out: Vec<(f64, Vec<Complex64>, LocalJets)> = Vec::new();
        let mut s = 0.0;
        let mut vals = zero;
        let mut here = origin.clone();
        while (target - s) * dir > 1e-14 {
            let mut all = here.dpsi.clone();
            all.push(here.sqrt_w.clone());
            let mut step = safe_radius(&all, CONTINUATION_TOL).min(max_step);
            step = step.min((target - s).abs());
            let mut accepted = None;
            while step >= MIN_STEP {
                let t = dir * step;
                let x = u + s + t;
                let pred = here.sqrt_w.eval(t);
                let (a, b, c) = cf.values(x);
                let w0 = (z - c) / a + b * b / (a * a * 4.0);
                let r = w0.sqrt();
                let root = if (r - pred).norm() <= (r + pred).norm() { r } else { -r };
                let close = (root - pred).norm() <= 1e-8 * pred.norm().max(1e-300);
                if w0.norm() > 1e-12 && close {
                    if let Ok(next) = local_jets(cf, x, z, root, n, len) {
                        accepted = Some((t, next));
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some((t, next)) = accepted else { break };
            let new_vals: Vec<Complex64> = vals
                .iter()
                .zip(&here.dpsi)
                .map(|(v, d)| v + d.integrate(Complex64::new(0.0, 0.0)).eval(t))
                .collect();
            s += t;
            if (target - s).abs() < 1e-12 {
                s = target;
            }
            out.push((s, new_vals.clone(), next.clone()));
            vals = new_vals;
            here = next;
        }
        Ok(out)
    }

    /// Offsets `(s_min, s_max)` reached by the continuation.
    pub fn reach(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn nearest(&self, s: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x < s);
        if k == 0 {
            0
        } else if k == self.nodes.len() {
            k - 1
        } else if (s - self.nodes[k - 1]) <= (self.nodes[k] - s) {
            k - 1
        } else {
            k
        }
    }

    /// `(psi_m, psi_m', psi_m'')` at offset `s` for `m = -1..=n`.
    pub fn eval(&self, s: f64) -> Result<Vec<[Complex64; 3]>> {
        let (lo, hi) = self.reach();
        if s < lo - 1e-12 || s > hi + 1e-12 {
            return Err(Error::Domain { x: self.u + s, lo: self.u + lo, hi: self.u + hi });
        }
        let k = self.nearest(s);
        let t = s - self.nodes[k];
        Ok(self.jets[k]
            .dpsi
            .iter()
            .zip(&self.values[k])
            .map(|(d, v)| {
                let (d0, d1) = eval_with_derivative(d, t);
                let integral = d.integrate(Complex64::new(0.0, 0.0)).eval(t);
                [v + integral, d0, d1]
            })
            .collect())
    }

    /// Combined phase `Psi = sum_m h^m psi_m` with its first two derivatives.
    pub fn combined(&self, s: f64, h: f64) -> Result<[Complex64; 3]> {
        let parts = self.eval(s)?;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut w = 1.0 / h;
        for p in parts {
            for q in 0..3 {
                out[q] += p[q] * w;
            }
            w *= h;
        }
        Ok(out)
    }

    /// `Re psi_{-1}(s)`.
    pub fn eikonal_real(&self, s: f64) -> Result<f64> {
        Ok(self.eval(s)?[0][0].re)
    }
}

fn eval_with_derivative(s: &Series, t: f64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for c in s.coeffs().iter().rev() {
        d = d * t + v;
        v = v * t + c;
    }
    (v, d)
}

/// Ladder parameters for [`choose_delta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffRequest {
    pub delta0: f64,
    pub halvings: usize,
    pub probes: usize,
    pub one_sided: bool,
}

impl Default for CutoffRequest {
    fn default() -> Self {
        CutoffRequest { delta0: 0.5, halvings: 40, probes: 64, one_sided: false }
    }
}

/// Largest `delta = delta0 * 2^-j` on which the decay profile of `Re psi_{-1}` stays
/// at least half its value at the origin, within the continuation reach.
///
/// Two-sided: `F(s) = -2 Re psi_{-1}(s) / s^2`. One-sided: `F(s) = -2 Re psi_{-1}(s) / s`.
pub fn choose_delta(phase: &ContinuedPhase, req: &CutoffRequest) -> Result<CutoffSpec> {
    if !(req.delta0 > 0.0) || req.probes == 0 {
        return Err(Error::Precondition("cutoff ladder needs delta0 > 0 and probes > 0".into()));
    }
    let origin = phase.eval(0.0)?;
    let f0 = if req.one_sided {
        -2.0 * origin[0][1].re
    } else {
        -origin[0][2].re
    };
    if !(f0 > 0.0) {
        return Err(Error::NoCutoff(format!(
            "decay rate at the origin is {f0:e}; the point is outside the decaying region"
        )));
    }
    let profile = |s: f64| -> Result<f64> {
        let re = phase.eikonal_real(s)?;
        Ok(if req.one_sided { -2.0 * re / s } else { -2.0 * re / (s * s) })
    };
    let (lo, hi) = phase.reach();
    let reach = if req.one_sided { hi } else { hi.min(-lo) };
    let mut delta = req.delta0;
    'ladder: for _ in 0..=req.halvings {
        if delta <= reach + 1e-12 {
            for k in 1..=req.probes {
                let s = delta * k as f64 / req.probes as f64;
                let sides: &[f64] = if req.one_sided { &[1.0] } else { &[1.0, -1.0] };
                for &sign in sides {
                    if profile(sign * s)? < 0.5 * f0 {
                        delta *= 0.5;
                        continue 'ladder;
                    }
                }
            }
            return Ok(CutoffSpec { delta, one_sided: req.one_sided });
        }
        delta *= 0.5;
    }
    Err(Error::NoCutoff(format!(
        "no radius down to {delta:e} keeps the decay profile above half of {f0:e}"
    )))
}

/// Checks that `(u, xi)` lies in the positive-bracket region.
pub(crate) fn require_omega(cf: &CoefficientField, p: PhasePoint) -> Result<Complex64> {
    let z = principal_symbol(cf, p)?;
    if crate::symbol::poisson_bracket(cf, p)? <= 0.0 {
        return Err(Error::NotInOmega { u: p.u, xi: p.xi });
    }
    Ok(z)
}
