//! Boundary pseudomodes at the left endpoint `x = 0` of a domain `[0, gamma]`: exit
//! condition, admissible band of complex momenta, the parabola of boundary
//! pseudospectral values, one-sided phases, and Robin combinations.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::symbol::{symbol_at, CoefficientField};
use crate::wkb::{
    check_h, choose_delta, phase_series, ContinuedPhase, CutoffRequest, CutoffSpec, ModeKind,
    ModeMeta, ModeOptions, PhaseSeries, Profile, Pseudomode,
};

/// Complex momentum of a boundary mode; `Im xi > 0` so that `exp(i xi s / h)` decays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCovector {
    xi: Complex64,
}

impl BoundaryCovector {
    pub fn new(xi: Complex64) -> Result<Self> {
        if xi.im > 0.0 && xi.is_finite() {
            Ok(BoundaryCovector { xi })
        } else {
            Err(Error::Precondition(format!("boundary momentum needs Im xi > 0, got {xi}")))
        }
    }

    pub fn xi(&self) -> Complex64 {
        self.xi
    }
}

/// `coef_deriv * h f'(0) + coef_value * f(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinCondition {
    pub coef_deriv: Complex64,
    pub coef_value: Complex64,
}

impl RobinCondition {
    pub fn new(coef_deriv: Complex64, coef_value: Complex64) -> Result<Self> {
        if coef_deriv.norm() == 0.0 && coef_value.norm() == 0.0 {
            return Err(Error::Precondition("Robin coefficients are both zero".into()));
        }
        Ok(RobinCondition { coef_deriv, coef_value })
    }

    pub fn dirichlet() -> Self {
        RobinCondition { coef_deriv: 0.0.into(), coef_value: 1.0.into() }
    }

    pub fn neumann() -> Self {
        RobinCondition { coef_deriv: 1.0.into(), coef_value: 0.0.into() }
    }

    /// `coef_deriv * h g'(0) + coef_value * g(0)`.
    pub fn trace(&self, h: f64, g0: Complex64, dg0: Complex64) -> Complex64 {
        self.coef_deriv * dg0 * h + self.coef_value * g0
    }

    /// The trace normalized by `h^{-1/2} (|coef_deriv| + |coef_value|)`.
    pub fn normalized_residual(&self, h: f64, g0: Complex64, dg0: Complex64) -> f64 {
        self.trace(h, g0, dg0).norm() * h.sqrt() / (self.coef_deriv.norm() + self.coef_value.norm())
    }
}

fn boundary_values(cf: &CoefficientField) -> Result<(Complex64, Complex64, Complex64)> {
    cf.check(0.0)?;
    Ok(cf.values(0.0))
}

/// `Im(-b(0) / a(0)) > 0`.
pub fn exit_condition(cf: &CoefficientField) -> Result<bool> {
    let (a, b, _) = boundary_values(cf)?;
    Ok((-b / a).im > 0.0)
}

/// The band `(0, Im(-b(0)/a(0)))` of admissible `Im xi`.
pub fn boundary_band(cf: &CoefficientField) -> Result<(f64, f64)> {
    let (a, b, _) = boundary_values(cf)?;
    let top = (-b / a).im;
    if !(top > 0.0) {
        return Err(Error::Precondition(format!(
            "exit condition fails at 0: Im(-b/a) = {top}"
        )));
    }
    Ok((0.0, top))
}

/// Vertex value `c(0) - b(0)^2 / (4 a(0))`, the only `z` with a double root.
pub fn parabola_vertex(cf: &CoefficientField) -> Result<Complex64> {
    let (a, b, c) = boundary_values(cf)?;
    Ok(c - b * b / (a * 4.0))
}

/// Both solutions of `a(0) xi^2 + b(0) xi + c(0) = z`, ordered by imaginary then real part.
pub fn quadratic_roots(cf: &CoefficientField, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (a, b, c) = boundary_values(cf)?;
    let disc = b * b - a * (c - z) * 4.0;
    let scale = b.norm_sqr() + (a * (c - z)).norm() * 4.0;
    if disc.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate(format!("z = {z} is the vertex value; the roots coincide")));
    }
    let sq = disc.sqrt();
    // the larger-magnitude root first, the other from the product to avoid cancellation
    let q = if (b.conj() * sq).re >= 0.0 { -(b + sq) * 0.5 } else { -(b - sq) * 0.5 };
    let r1 = q / a;
    let r2 = (c - z) / q;
    let mut roots = [r1, r2];
    // adding zero folds -0.0 into 0.0
    roots.sort_by(|x, y| (x.im + 0.0).total_cmp(&(y.im + 0.0)).then((x.re + 0.0).total_cmp(&(y.re + 0.0))));
    Ok((roots[0], roots[1]))
}

/// Whether `z` lies strictly inside the parabola `{sigma(0, t) : t real}`, decided by
/// both roots lying in the band. The vertex value counts as inside.
pub fn inside_parabola(cf: &CoefficientField, z: Complex64) -> Result<bool> {
    let (_, top) = boundary_band(cf)?;
    match quadratic_roots(cf, z) {
        Ok((r1, r2)) => Ok([r1, r2].iter().all(|r| r.im > 0.0 && r.im < top)),
        Err(Error::Degenerate(_)) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Writes `t, re_z, im_z` for `z = sigma(0, t)`, `t` uniform on `[t_lo, t_hi]`.
pub fn write_parabola_csv<W: Write>(
    cf: &CoefficientField,
    t_range: (f64, f64),
    points: usize,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "re_z", "im_z"])?;
    for t in linspace(t_range.0, t_range.1, points) {
        let z = symbol_at(cf, 0.0, Complex64::new(t, 0.0))?;
        w.write_record([t.to_string(), z.re.to_string(), z.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One-sided phase series at `x = 0` for complex momentum `xi`.
pub fn boundary_phase(
    cf: &CoefficientField,
    xi: BoundaryCovector,
    n: usize,
    degree: usize,
) -> Result<PhaseSeries> {
    phase_series(cf, 0.0, xi.xi, n, degree)
}

/// Sampling grid on `[0, delta]`: `points` uniform samples over `[0, l]` where the mode
/// is not negligible, and a coarser tail over `[l, delta]`.
fn graded_grid(delta: f64, l: f64, points: usize) -> Vec<f64> {
    if l >= delta {
        return linspace(0.0, delta, points);
    }
    let mut g = linspace(0.0, l, points);
    g.extend(linspace(l, delta, points / 4 + 2).into_iter().skip(1));
    g
}

/// `h`-independent data of a boundary mode.
#[derive(Debug, Clone)]
pub struct BoundaryModel {
    pub xi: BoundaryCovector,
    pub n: usize,
    pub z: Complex64,
    pub series: PhaseSeries,
    pub phase: Arc<ContinuedPhase>,
    pub cutoff: CutoffSpec,
    /// `-2 Re psi_{-1}'(0)`, the initial decay rate of `|f|^2`.
    pub decay: f64,
    pub points: usize,
}

impl BoundaryModel {
    pub fn new(cf: &CoefficientField, xi: BoundaryCovector, n: usize, opts: &ModeOptions) -> Result<Self> {
        let series = boundary_phase(cf, xi, n, opts.degree)?;
        let phase = ContinuedPhase::build(
            cf,
            0.0,
            xi.xi,
            n,
            opts.degree,
            (0.0, opts.cutoff.delta0),
            opts.max_step,
        )?;
        let req = CutoffRequest { one_sided: true, ..opts.cutoff };
        let cutoff = choose_delta(&phase, &req)?;
        let decay = -2.0 * phase.eval(0.0)?[0][1].re;
        Ok(BoundaryModel {
            xi,
            n,
            z: series.z,
            series,
            phase: Arc::new(phase),
            cutoff,
            decay,
            points: opts.points,
        })
    }

    fn profile(&self, h: f64) -> Profile {
        Profile::Phase {
            origin: 0.0,
            phase: self.phase.clone(),
            cutoff: self.cutoff,
            h,
            prefactor: h.powf(-0.5),
        }
    }

    /// Offset beyond which `|f|^2` has dropped below roughly `exp(-40)`.
    fn significant(&self, h: f64) -> f64 {
        80.0 * h / self.decay
    }

    /// `h^{-1/2} chi(s) exp(psi(s))` on `[0, delta]`.
    pub fn mode(&self, h: f64) -> Result<Pseudomode> {
        check_h(h)?;
        let meta = ModeMeta {
            kind: ModeKind::Boundary,
            h,
            n: self.n,
            u: 0.0,
            xi: self.xi.xi,
            z: self.z,
            phase: Some(self.series.clone()),
            cutoff: Some(self.cutoff),
        };
        let grid = graded_grid(self.cutoff.delta, self.significant(h), self.points);
        Pseudomode::sample(meta, self.profile(h), grid)
    }
}

/// Boundary pseudomode for momentum `xi` at parameter `h`.
pub fn boundary_mode(
    cf: &CoefficientField,
    xi: BoundaryCovector,
    h: f64,
    n: usize,
    opts: &ModeOptions,
) -> Result<Pseudomode> {
    check_h(h)?;
    BoundaryModel::new(cf, xi, n, opts)?.mode(h)
}

/// A Robin-compatible combination `alpha f_1 + beta f_2` of the boundary modes for the two
/// roots of `sigma(0, xi) = z`.
#[derive(Debug, Clone)]
pub struct RobinMode {
    pub mode: Pseudomode,
    pub roots: (Complex64, Complex64),
    /// Coefficients from the numeric traces of `f_1, f_2`, scaled by `h^{1/2}`.
    pub coefficients: (Complex64, Complex64),
    /// Leading-order coefficients `(i coef_deriv xi_2 + coef_value, -(i coef_deriv xi_1 + coef_value))`.
    pub leading: (Complex64, Complex64),
    /// Normalized trace of the combination at `x = 0`.
    pub bc_residual: f64,
}

/// `h`-independent data for Robin combinations at a fixed `z`.
#[derive(Debug, Clone)]
pub struct RobinModel {
    pub rc: RobinCondition,
    pub z: Complex64,
    pub first: BoundaryModel,
    pub second: BoundaryModel,
}

impl RobinModel {
    pub fn new(
        cf: &CoefficientField,
        rc: RobinCondition,
        z: Complex64,
        n: usize,
        opts: &ModeOptions,
    ) -> Result<Self> {
        let (_, top) = boundary_band(cf)?;
        let (r1, r2) = quadratic_roots(cf, z)?;
        if !(r1.im > 0.0 && r2.im < top) {
            return Err(Error::Precondition(format!(
                "z = {z} is not strictly inside the boundary parabola"
            )));
        }
        let first = BoundaryModel::new(cf, BoundaryCovector::new(r1)?, n, opts)?;
        let second = BoundaryModel::new(cf, BoundaryCovector::new(r2)?, n, opts)?;
        Ok(RobinModel { rc, z, first, second })
    }

    pub fn mode(&self, h: f64) -> Result<RobinMode> {
        check_h(h)?;
        let (x1, x2) = (self.first.xi.xi, self.second.xi.xi);
        let p1 = self.first.profile(h);
        let p2 = self.second.profile(h);
        let t1 = p1.eval(0.0)?;
        let t2 = p2.eval(0.0)?;
        let b1 = self.rc.trace(h, t1[0], t1[1]);
        let b2 = self.rc.trace(h, t2[0], t2[1]);
        let scale = h.powf(-0.5) * (self.rc.coef_deriv.norm() + self.rc.coef_value.norm());
        if b1.norm().max(b2.norm()) <= 1e-14 * scale {
            return Err(Error::Degenerate(
                "both boundary modes already satisfy the condition; the combination is not unique".into(),
            ));
        }
        let root_h = h.sqrt();
        let alpha = b2 * root_h;
        let beta = -b1 * root_h;
        let i = Complex64::new(0.0, 1.0);
        let leading = (
            i * self.rc.coef_deriv * x2 + self.rc.coef_value,
            -(i * self.rc.coef_deriv * x1 + self.rc.coef_value),
        );
        let profile = Profile::Combined(vec![(alpha, Arc::new(p1)), (beta, Arc::new(p2))]);
        let delta = self.first.cutoff.delta.max(self.second.cutoff.delta);
        let l = self.first.significant(h).max(self.second.significant(h));
        let grid = graded_grid(delta, l, self.first.points.max(self.second.points));
        let meta = ModeMeta {
            kind: ModeKind::Combined,
            h,
            n: self.first.n,
            u: 0.0,
            xi: x1,
            z: self.z,
            phase: None,
            cutoff: None,
        };
        let mode = Pseudomode::sample(meta, profile, grid)?;
        let t = mode.eval(0.0)?;
        let bc_residual = self.rc.normalized_residual(h, t[0], t[1]);
        Ok(RobinMode { mode, roots: (x1, x2), coefficients: (alpha, beta), leading, bc_residual })
    }
}

/// Combination of the two boundary modes at `z` satisfying the Robin condition exactly.
pub fn robin_combination(
    cf: &CoefficientField,
    rc: RobinCondition,
    z: Complex64,
    h: f64,
    n: usize,
    opts: &ModeOptions,
) -> Result<RobinMode> {
    check_h(h)?;
    RobinModel::new(cf, rc, z, n, opts)?.mode(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::residual_triple;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exit_op() -> CoefficientField {
        CoefficientField::advection_exit((0.0, 8.0))
    }

    fn with_b(a: f64, b: Complex64) -> CoefficientField {
        CoefficientField::polynomial(vec![a.into()], vec![b], vec![0.0.into()], (0.0, 4.0)).unwrap()
    }

    /// Point-in-region test against a dense polyline of the parabola closed far out.
    fn polygon_inside(cf: &CoefficientField, z: Complex64) -> bool {
        let pts: Vec<Complex64> = linspace(-60.0, 60.0, 20001)
            .into_iter()
            .map(|t| symbol_at(cf, 0.0, c(t, 0.0)).unwrap())
            .collect();
        let mut inside = false;
        let n = pts.len();
        for k in 0..n {
            let (p, q) = (pts[k], pts[(k + 1) % n]);
            if (p.im > z.im) != (q.im > z.im) {
                let x = p.re + (z.im - p.im) * (q.re - p.re) / (q.im - p.im);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    #[test]
    fn exit_and_band() {
        assert!(exit_condition(&with_b(1.0, c(0.0, -1.0))).unwrap());
        assert!(!exit_condition(&with_b(1.0, c(0.0, 1.0))).unwrap());
        assert!(!exit_condition(&with_b(1.0, c(0.7, 0.0))).unwrap());
        assert_eq!(boundary_band(&with_b(1.0, c(0.0, -1.0))).unwrap(), (0.0, 1.0));
        assert_eq!(boundary_band(&with_b(2.0, c(0.0, -2.0))).unwrap(), (0.0, 1.0));
        assert_eq!(boundary_band(&with_b(1.0, c(0.0, -3.0))).unwrap(), (0.0, 3.0));
        assert!(boundary_band(&with_b(1.0, c(0.0, 1.0))).is_err());
    }

    #[test]
    fn roots_solve_the_quadratic() {
        let cf = exit_op();
        let (r1, r2) = quadratic_roots(&cf, c(0.2, 0.0)).unwrap();
        let s5 = 5f64.sqrt();
        assert!((r1 - c(0.0, (1.0 - 1.0 / s5) / 2.0)).norm() < 1e-14);
        assert!((r2 - c(0.0, (1.0 + 1.0 / s5) / 2.0)).norm() < 1e-14);
        assert!((r1 * r2 - c(-0.2, 0.0)).norm() < 1e-14);
        for z in [c(0.2, 0.0), c(3.0, -1.0), c(-2.0, 0.5), c(100.0, 0.0)] {
            let (r1, r2) = quadratic_roots(&cf, z).unwrap();
            for r in [r1, r2] {
                let s = symbol_at(&cf, 0.0, r).unwrap();
                assert!((s - z).norm() <= 1e-12 * z.norm().max(1.0));
            }
        }
        assert!(matches!(quadratic_roots(&cf, c(0.25, 0.0)), Err(Error::Degenerate(_))));
        let free = CoefficientField::polynomial(vec![1.0.into()], vec![0.0.into()], vec![0.0.into()], (0.0, 1.0)).unwrap();
        assert_eq!(quadratic_roots(&free, c(1.0, 0.0)).unwrap(), (c(-1.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn parabola_interior_matches_polygon_oracle() {
        use rand::{Rng, SeedableRng};
        let cf = exit_op();
        assert!(inside_parabola(&cf, c(0.2, 0.0)).unwrap());
        assert!(!inside_parabola(&cf, c(0.0, 0.0)).unwrap());
        assert!(polygon_inside(&cf, c(100.0, 0.0)));
        assert!(inside_parabola(&cf, c(100.0, 0.0)).unwrap());
        assert!(inside_parabola(&cf, c(0.25, 0.0)).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let skew = CoefficientField::polynomial(
            vec![c(1.0, 0.3)],
            vec![c(0.4, -2.0)],
            vec![c(0.5, 0.2)],
            (0.0, 1.0),
        )
        .unwrap();
        for op in [&cf, &skew] {
            for _ in 0..100 {
                let z = c(rng.random_range(-3.0..6.0), rng.random_range(-4.0..4.0));
                assert_eq!(inside_parabola(op, z).unwrap(), polygon_inside(op, z), "z = {z}");
            }
        }
    }

    #[test]
    fn constant_coefficient_phase_is_linear() {
        let cf = exit_op();
        let xi = BoundaryCovector::new(c(0.0, 0.3)).unwrap();
        let ph = boundary_phase(&cf, xi, 2, 16).unwrap();
        assert!((ph.psi(-1).coeff(1) - c(0.0, 1.0) * c(0.0, 0.3)).norm() < 1e-15);
        for m in -1..=2 {
            for j in 0..=16 {
                if !(m == -1 && j == 1) {
                    assert!(ph.psi(m).coeff(j).norm() < 1e-15);
                }
            }
        }
        let vertex = BoundaryCovector::new(c(0.0, 0.5)).unwrap();
        assert!(matches!(boundary_phase(&cf, vertex, 0, 16), Err(Error::BranchPoint { .. })));
        assert!(BoundaryCovector::new(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn variable_coefficient_phase_starts_with_i_xi() {
        let cf = CoefficientField::polynomial(
            vec![1.0.into()],
            vec![c(0.0, -1.0)],
            vec![0.0.into(), c(0.5, 0.5)],
            (0.0, 2.0),
        )
        .unwrap();
        let xi = c(0.2, 0.4);
        let ph = boundary_phase(&cf, BoundaryCovector::new(xi).unwrap(), 1, 12).unwrap();
        assert!((ph.psi(-1).coeff(1) - c(0.0, 1.0) * xi).norm() < 1e-14);
        assert_eq!(ph.psi(-1).coeff(0), c(0.0, 0.0));
    }

    #[test]
    fn boundary_mode_value_and_norm() {
        let cf = exit_op();
        let xi = BoundaryCovector::new(c(0.0, 0.3)).unwrap();
        let opts = ModeOptions { cutoff: CutoffRequest { delta0: 4.0, ..Default::default() }, ..Default::default() };
        let model = BoundaryModel::new(&cf, xi, 0, &opts).unwrap();
        for h in [1.0 / 16.0, 1.0 / 128.0, 1.0 / 512.0] {
            let m = model.mode(h).unwrap();
            assert_eq!(m.f[0], c(h.powf(-0.5), 0.0));
            let expect = 1.0 / (2.0 * 0.3);
            assert!((m.norm().powi(2) - expect).abs() < 2e-3 * expect, "h = {h}");
            let r = residual_triple(&m, &cf).unwrap();
            let q = h / 0.6 * 2f64.sqrt();
            assert!((r.r_q - q).abs() < 1e-2 * q);
        }
    }

    #[test]
    fn robin_traces_vanish() {
        let cf = exit_op();
        let opts = ModeOptions { cutoff: CutoffRequest { delta0: 4.0, ..Default::default() }, ..Default::default() };
        let z = c(0.2, 0.0);
        for rc in [RobinCondition::dirichlet(), RobinCondition::neumann(), RobinCondition::new(1.0.into(), 1.0.into()).unwrap()] {
            let model = RobinModel::new(&cf, rc, z, 1, &opts).unwrap();
            for h in [1.0 / 16.0, 1.0 / 256.0] {
                let rm = model.mode(h).unwrap();
                assert!(rm.bc_residual < 1e-13, "{rc:?} h = {h}: {:e}", rm.bc_residual);
                let ratio = rm.coefficients.0 / rm.coefficients.1;
                let lead = rm.leading.0 / rm.leading.1;
                assert!((ratio - lead).norm() <= 1e-12 * lead.norm().max(1.0));
            }
        }
        let d = RobinModel::new(&cf, RobinCondition::dirichlet(), z, 0, &opts).unwrap().mode(0.01).unwrap();
        assert!((d.coefficients.0 - c(1.0, 0.0)).norm() < 1e-14 && (d.coefficients.1 + c(1.0, 0.0)).norm() < 1e-14);
        assert!(RobinModel::new(&cf, RobinCondition::dirichlet(), c(0.25, 0.0), 0, &opts).is_err());
        assert!(RobinModel::new(&cf, RobinCondition::dirichlet(), c(-1.0, 0.0), 0, &opts).is_err());
        assert!(RobinCondition::new(0.0.into(), 0.0.into()).is_err());
    }

    #[test]
    fn robin_leading_coefficients_recovered_as_h_shrinks() {
        // variable c perturbs h f'(0) away from i xi h^{-1/2} at order h
        let cf = CoefficientField::polynomial(
            vec![1.0.into()],
            vec![c(0.0, -1.0)],
            vec![0.0.into(), c(0.0, 0.3)],
            (0.0, 3.0),
        )
        .unwrap();
        let opts = ModeOptions { cutoff: CutoffRequest { delta0: 2.0, ..Default::default() }, ..Default::default() };
        let rc = RobinCondition::new(1.0.into(), 1.0.into()).unwrap();
        let model = RobinModel::new(&cf, rc, c(0.2, 0.0), 1, &opts).unwrap();
        let gap = |h: f64| {
            let rm = model.mode(h).unwrap();
            let (a, b) = rm.coefficients;
            let (la, lb) = rm.leading;
            ((a - la).norm() + (b - lb).norm()) / (la.norm() + lb.norm())
        };
        let (g1, g2) = (gap(1.0 / 64.0), gap(1.0 / 256.0));
        assert!(g1 > 1e-6);
        assert!((g1 / g2 - 4.0).abs() < 0.5, "{g1:e} {g2:e}");
    }

    #[test]
    fn parabola_csv() {
        let mut buf = Vec::new();
        write_parabola_csv(&exit_op(), (-1.0, 1.0), 3, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,re_z,im_z\n-1,1,1\n0,0,0\n1,1,-1\n");
    }
}
