//! Smooth cutoff profiles.

use serde::{Deserialize, Serialize};

/// Inputs below this threshold make `exp(-1/t)` underflow; treated as zero.
const FLAT: f64 = 1.0 / 700.0;

/// `exp(-1/t)` for `t > 0` and its first two derivatives; zero for `t <= 0`.
fn edge(t: f64) -> (f64, f64, f64) {
    if t <= FLAT {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / t).exp();
    let t2 = t * t;
    (g, g / t2, g * (1.0 / (t2 * t2) - 2.0 / (t2 * t)))
}

/// Smooth step equal to 1 for `t <= 0`, 0 for `t >= 1`, with first and second
/// derivatives.
pub fn smooth_step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let (p, dp0, ddp) = edge(1.0 - t);
    let dp = -dp0;
    let (q, dq, ddq) = edge(t);
    let d = p + q;
    let dd = dp + dq;
    let num = dp * q - p * dq;
    let dnum = ddp * q - p * ddq;
    (p / d, num / (d * d), dnum / (d * d) - 2.0 * num * dd / (d * d * d))
}

/// Cutoff equal to 1 for `|s| <= delta/2` and 0 for `|s| >= delta`. One-sided cutoffs
/// are used on `[0, delta]` for modes anchored at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub delta: f64,
    pub one_sided: bool,
}

impl CutoffSpec {
    pub fn new(delta: f64) -> Self {
        CutoffSpec { delta, one_sided: false }
    }

    pub fn one_sided(delta: f64) -> Self {
        CutoffSpec { delta, one_sided: true }
    }

    /// `(chi, chi', chi'')` at offset `s`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        if self.one_sided && s < 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let half = 0.5 * self.delta;
        let t = (s.abs() - half) / half;
        let (v, d1, d2) = smooth_step(t);
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        (v, d1 * sign / half, d2 / (half * half))
    }

    pub fn support(&self) -> (f64, f64) {
        if self.one_sided {
            (0.0, self.delta)
        } else {
            (-self.delta, self.delta)
        }
    }
}
