//! Adaptive Gauss-Kronrod quadrature on finite and half-infinite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 20_000;

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = r * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Integral of `f` over `[a, b]` to absolute tolerance `abs_tol` or relative tolerance
/// `rel_tol`, whichever is looser, by global bisection of the worst subinterval.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate_breaks(&mut f, &[a, b], abs_tol, rel_tol)
}

/// As [`integrate`], starting from the subintervals between consecutive `breaks`.
pub fn integrate_breaks(
    f: &mut impl FnMut(f64) -> f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(f, w[0], w[1]);
            parts.push((w[0], w[1], v, e));
        }
    }
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Numeric("quadrature produced a nonfinite value".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "quadrature did not reach tolerance: estimate {total:e}, error {err:e}"
            )));
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (k, p)| if p.3 > best.1 { (k, p.3) } else { best });
        let (a, b, _, _) = parts.swap_remove(k);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        parts.push((a, m, v1, e1));
        parts.push((m, b, v2, e2));
    }
}

/// Integral over `[a, inf)` through `x = a + t / (1 - t)`; `breaks` are extra split
/// points in `x` beyond `a`. Narrow features must be bracketed by breaks, since a rule
/// that sees only zeros reports zero error.
pub fn integrate_to_infinity(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - t;
        let v = f(a + t / d);
        if v == 0.0 {
            0.0
        } else {
            v / (d * d)
        }
    };
    let mut ts = vec![0.0];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x.is_finite()).collect();
    inner.sort_by(f64::total_cmp);
    for x in inner {
        let y = x - a;
        ts.push(y / (1.0 + y));
    }
    ts.push(1.0);
    ts.dedup();
    integrate_breaks(&mut g, &ts, abs_tol, rel_tol)
}
