//! Operator coefficients as jet providers.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::Series;

/// A complex-valued function of a real variable that can report its Taylor
/// coefficients `f^(j)(x) / j!` for `j = 0..=order`.
pub trait Jet: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> Complex64;

    fn jet(&self, x: f64, order: usize) -> Vec<Complex64>;

    /// Highest order for which `jet` is trustworthy.
    fn max_order(&self) -> usize {
        usize::MAX
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for j in 1..=n {
        f[j] = f[j - 1] * j as f64;
    }
    f
}

/// `sum_k coeffs[k] x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Polynomial {
            coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }
}

impl Jet for Polynomial {
    fn value(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    fn jet(&self, x: f64, order: usize) -> Vec<Complex64> {
        // Taylor shift: coefficient j about x is sum_k binom(k, j) c_k x^(k-j).
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        let mut work = self.coeffs.clone();
        for slot in out.iter_mut() {
            if work.is_empty() {
                break;
            }
            *slot = work
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c);
            // synthetic division by (t - x) leaves the quotient for the next order
            let n = work.len();
            let mut quotient = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
            let mut carry = Complex64::new(0.0, 0.0);
            for k in (1..n).rev() {
                carry = carry * x + work[k];
                quotient[k - 1] = carry;
            }
            work = quotient;
        }
        out
    }
}

/// `scale * exp(rate * x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponential {
    pub scale: Complex64,
    pub rate: Complex64,
}

impl Jet for Exponential {
    fn value(&self, x: f64) -> Complex64 {
        self.scale * (self.rate * x).exp()
    }

    fn jet(&self, x: f64, order: usize) -> Vec<Complex64> {
        let base = self.value(x);
        let fact = factorials(order);
        (0..=order)
            .map(|j| base * self.rate.powu(j as u32) / fact[j])
            .collect()
    }
}

/// `amplitude * sin(frequency * x + phase)`; use `phase = pi/2` for a cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinusoid {
    pub amplitude: Complex64,
    pub frequency: Complex64,
    pub phase: Complex64,
}

impl Jet for Sinusoid {
    fn value(&self, x: f64) -> Complex64 {
        self.amplitude * (self.frequency * x + self.phase).sin()
    }

    fn jet(&self, x: f64, order: usize) -> Vec<Complex64> {
        let theta = self.frequency * x + self.phase;
        let (s, c) = (theta.sin(), theta.cos());
        let fact = factorials(order);
        (0..=order)
            .map(|j| {
                let d = match j % 4 {
                    0 => s,
                    1 => c,
                    2 => -s,
                    _ => -c,
                };
                self.amplitude * d * self.frequency.powu(j as u32) / fact[j]
            })
            .collect()
    }
}

/// Sum of jet providers.
#[derive(Debug, Clone)]
pub struct JetSum(pub Vec<Arc<dyn Jet>>);

impl Jet for JetSum {
    fn value(&self, x: f64) -> Complex64 {
        self.0.iter().map(|j| j.value(x)).sum()
    }

    fn jet(&self, x: f64, order: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        for term in &self.0 {
            for (o, v) in out.iter_mut().zip(term.jet(x, order)) {
                *o += v;
            }
        }
        out
    }

    fn max_order(&self) -> usize {
        self.0.iter().map(|j| j.max_order()).min().unwrap_or(usize::MAX)
    }
}

/// Value-only closure whose low-order jets come from central differences.
///
/// Orders above [`FiniteDifference::MAX_ORDER`] are reported as zero.
#[derive(Clone)]
pub struct FiniteDifference {
    f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub step: f64,
}

impl FiniteDifference {
    pub const MAX_ORDER: usize = 4;

    pub fn new(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static, step: f64) -> Self {
        FiniteDifference { f: Arc::new(f), step }
    }
}

impl fmt::Debug for FiniteDifference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteDifference").field("step", &self.step).finish()
    }
}

impl Jet for FiniteDifference {
    fn value(&self, x: f64) -> Complex64 {
        (self.f)(x)
    }

    fn jet(&self, x: f64, order: usize) -> Vec<Complex64> {
        let h = self.step;
        let f = |t: f64| (self.f)(x + t * h);
        let (fm2, fm1, f0, f1, f2) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
        let derivs = [
            f0,
            (fm2 - fm1 * 8.0 + f1 * 8.0 - f2) / (12.0 * h),
            (-fm2 + fm1 * 16.0 - f0 * 30.0 + f1 * 16.0 - f2) / (12.0 * h * h),
            (-fm2 + fm1 * 2.0 - f1 * 2.0 + f2) / (2.0 * h * h * h),
            (fm2 - fm1 * 4.0 + f0 * 6.0 - f1 * 4.0 + f2) / (h * h * h * h),
        ];
        let fact = factorials(order);
        (0..=order)
            .map(|j| {
                if j <= Self::MAX_ORDER {
                    derivs[j] / fact[j]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    fn max_order(&self) -> usize {
        Self::MAX_ORDER
    }
}

/// Coefficients `a, b, c` of `L_h f = -h^2 a f'' - i h b f' + c f` on a closed interval.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub a: Arc<dyn Jet>,
    pub b: Arc<dyn Jet>,
    pub c: Arc<dyn Jet>,
    lo: f64,
    hi: f64,
    pub jet_order_max: usize,
    pub name: String,
}

/// Number of probe points used to check that `a` stays away from zero.
pub const ELLIPTICITY_PROBES: usize = 512;

impl CoefficientField {
    /// Builds the field, failing if `a` vanishes at any of the probe points.
    pub fn new(
        a: Arc<dyn Jet>,
        b: Arc<dyn Jet>,
        c: Arc<dyn Jet>,
        domain: (f64, f64),
    ) -> Result<Self> {
        let field = Self::new_unchecked(a, b, c, domain)?;
        field.check_ellipticity(ELLIPTICITY_PROBES)?;
        Ok(field)
    }

    /// Builds the field without the ellipticity probe (for discretization tests with
    /// degenerate leading coefficient).
    pub fn new_unchecked(
        a: Arc<dyn Jet>,
        b: Arc<dyn Jet>,
        c: Arc<dyn Jet>,
        domain: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Precondition(format!("invalid domain [{lo}, {hi}]")));
        }
        let jet_order_max = a.max_order().min(b.max_order()).min(c.max_order());
        Ok(CoefficientField {
            a,
            b,
            c,
            lo,
            hi,
            jet_order_max,
            name: "custom".into(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn check_ellipticity(&self, probes: usize) -> Result<()> {
        let scale = (0..probes)
            .map(|k| self.a.value(self.probe(k, probes)).norm())
            .fold(0.0, f64::max);
        let mut prev: Option<(f64, Complex64)> = None;
        for k in 0..probes {
            let x = self.probe(k, probes);
            let a = self.a.value(x);
            let v = a.norm();
            if v == 0.0 || v <= 1e-12 * scale || !v.is_finite() {
                return Err(Error::NotElliptic { x });
            }
            // a zero between two probes shows up as a chord passing through the origin
            if let Some((xp, ap)) = prev {
                let d = a - ap;
                let t = (-(ap.re * d.re + ap.im * d.im) / d.norm_sqr()).clamp(0.0, 1.0);
                if (ap + d * t).norm() <= 1e-9 * scale {
                    return Err(Error::NotElliptic { x: xp + t * (x - xp) });
                }
            }
            prev = Some((x, a));
        }
        Ok(())
    }

    fn probe(&self, k: usize, probes: usize) -> f64 {
        self.lo + (self.hi - self.lo) * k as f64 / (probes - 1) as f64
    }

    /// Polynomial coefficients (ascending powers of x).
    pub fn polynomial(
        a: Vec<Complex64>,
        b: Vec<Complex64>,
        c: Vec<Complex64>,
        domain: (f64, f64),
    ) -> Result<Self> {
        Self::new(
            Arc::new(Polynomial::new(a)),
            Arc::new(Polynomial::new(b)),
            Arc::new(Polynomial::new(c)),
            domain,
        )
    }

    /// `a = 1, b = 0, c(x) = i x`.
    pub fn complex_airy(domain: (f64, f64)) -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self::polynomial(vec![1.0.into()], vec![0.0.into()], vec![0.0.into(), i], domain)
            .expect("constant leading coefficient is elliptic")
            .with_name("complex-airy")
    }

    /// `a = 1, b = 0, c(x) = i x^2`.
    pub fn davies_rotated(domain: (f64, f64)) -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self::polynomial(
            vec![1.0.into()],
            vec![0.0.into()],
            vec![0.0.into(), 0.0.into(), i],
            domain,
        )
        .expect("constant leading coefficient is elliptic")
        .with_name("davies-rotated")
    }

    /// `a = 1, b = -i, c = 0`.
    pub fn advection_exit(domain: (f64, f64)) -> Self {
        Self::polynomial(
            vec![1.0.into()],
            vec![Complex64::new(0.0, -1.0)],
            vec![0.0.into()],
            domain,
        )
        .expect("constant leading coefficient is elliptic")
        .with_name("advection-exit")
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `(a(x), b(x), c(x))`.
    pub fn values(&self, x: f64) -> (Complex64, Complex64, Complex64) {
        (self.a.value(x), self.b.value(x), self.c.value(x))
    }

    /// Taylor series of `a, b, c` about `x` with `len` coefficients each.
    pub fn jets(&self, x: f64, len: usize) -> (Series, Series, Series) {
        let order = len.saturating_sub(1);
        (
            Series::from_coeffs(self.a.jet(x, order)),
            Series::from_coeffs(self.b.jet(x, order)),
            Series::from_coeffs(self.c.jet(x, order)),
        )
    }
}
