//! Subcommands of the `pseudomode` binary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::boundary::{
    boundary_band, exit_condition, inside_parabola, parabola_vertex, write_parabola_csv, BoundaryCovector,
    BoundaryModel, RobinCondition, RobinModel,
};
use crate::config::{axis_points, ModeChoice, RunConfig};
use crate::error::{Error, Result};
use crate::fbi::{
    asymptotic_orthogonality, boundedness_profile, g_profile, isometry_probe, profile_limit, DistortedLayout,
    KernelKind, PhaseSpaceGrid, Transform, TransformKernel,
};
use crate::frame::{
    build_frame_on, evolution_bound, evolve_approx, generator, pseudospectrum_inclusion, semigroup_bound_check,
    write_bound_csv,
};
use crate::grid::{
    discretize, linear_fit, order_fit, residual_triple, resolvent_map, write_resolvent_csv, Grid1D, ResidualTriple,
};
use crate::symbol::{region_mask, symbol_image, CoefficientField, PhasePoint};
use crate::wkb::{assemble_mode, gaussian_mode, rough_mode, InteriorModel, ModeOptions, Pseudomode};

#[derive(Debug, Parser)]
#[command(name = "pseudomode", version, about = "Semiclassical pseudomodes and pseudospectra of 1-D operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positive-bracket region mask and its symbol image.
    Region(RunArgs),
    /// One interior, rough, Gaussian or boundary mode with its residuals.
    Mode(RunArgs),
    /// Boundary parabola, roots and the Robin combination at one `z`.
    Boundary(RunArgs),
    /// Residual sweep over `h` with fitted orders.
    Sweep(RunArgs),
    /// Smallest singular value of `L_h - z` over a rectangle of `z`.
    Psgrid(RunArgs),
    /// Boundedness, orthogonality and near-isometry diagnostics of FBI transforms.
    Fbi(RunArgs),
    /// Frame defect, semigroup bounds and approximate evolution.
    Evolve(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Region(a)
            | Command::Mode(a)
            | Command::Boundary(a)
            | Command::Sweep(a)
            | Command::Psgrid(a)
            | Command::Fbi(a)
            | Command::Evolve(a) => a,
        }
    }
}

/// Error report printed on standard error.
pub fn error_json(e: &Error) -> String {
    json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }).to_string()
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn main_entry() -> i32 {
    main_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

/// As [`main_entry`], with explicit arguments and streams. Written paths go to `out`, one
/// per line; errors go to `err` as one JSON object.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let e = Error::Config(e.to_string().trim().to_string());
            let _ = writeln!(err, "{}", error_json(&e));
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok(files) => {
            for f in files {
                let _ = writeln!(out, "{}", f.display());
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            e.exit_code()
        }
    }
}

pub fn run(cmd: &Command) -> Result<Vec<PathBuf>> {
    let args = cmd.args();
    let cfg = RunConfig::from_path(&args.config)?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    let mut sink = Sink { dir: out, files: Vec::new() };
    match cmd {
        Command::Region(_) => cmd_region(&cfg, &mut sink)?,
        Command::Mode(_) => cmd_mode(&cfg, &mut sink)?,
        Command::Boundary(_) => cmd_boundary(&cfg, &mut sink)?,
        Command::Sweep(_) => cmd_sweep(&cfg, &mut sink)?,
        Command::Psgrid(_) => cmd_psgrid(&cfg, &mut sink)?,
        Command::Fbi(_) => cmd_fbi(&cfg, &mut sink)?,
        Command::Evolve(_) => cmd_evolve(&cfg, &mut sink)?,
    }
    Ok(sink.files)
}

/// Output directory that records every file it hands out.
pub struct Sink {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Sink { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let p = self.dir.join(name);
        let f = File::create(&p)?;
        self.files.push(p);
        Ok(BufWriter::new(f))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.file(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut w = self.file(name)?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.file(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn missing(block: &str) -> Error {
    Error::Config(format!("config has no `{block}` block"))
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("`{what}` is required for this mode kind")))
}

fn triple_json(r: &ResidualTriple) -> serde_json::Value {
    json!({ "r_q": r.r_q, "r_p": r.r_p, "r_l": r.r_l, "norm": r.norm })
}

pub fn cmd_region(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let b = cfg.region.as_ref().ok_or_else(|| missing("region"))?;
    let cf = cfg.coefficients()?;
    let mask = region_mask(&cf, &axis_points(&b.u), &axis_points(&b.xi))?;
    mask.write_csv(sink.file("region.csv")?)?;
    let image = symbol_image(&mask, &cf)?;
    let rows: Vec<Vec<String>> = image
        .iter()
        .map(|p| vec![p.u.to_string(), p.xi.to_string(), p.sigma.re.to_string(), p.sigma.im.to_string()])
        .collect();
    sink.csv("image.csv", &["u", "xi", "re_sigma", "im_sigma"], &rows)?;
    sink.json(
        "region.json",
        &json!({ "operator": cf.name, "points": b.u.2 * b.xi.2, "in_omega": mask.count_in_omega(), "mask": mask }),
    )?;
    sink.text(
        "region.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset multiplot layout 1,2\n\
         set xlabel 'u'\nset ylabel 'xi'\nplot 'region.csv' using 1:2:4 with image notitle\n\
         set xlabel 'Re z'\nset ylabel 'Im z'\nplot 'image.csv' using 3:4 with dots notitle\nunset multiplot\n",
    )
}

fn build_mode(cf: &CoefficientField, kind: ModeChoice, u: f64, xi: Option<f64>, bxi: Option<Complex64>, h: f64, n: usize, opts: &ModeOptions) -> Result<Pseudomode> {
    match kind {
        ModeChoice::Interior => assemble_mode(cf, PhasePoint::new(u, need(xi, "xi")?), h, n, opts),
        ModeChoice::Rough => rough_mode(cf, PhasePoint::new(u, need(xi, "xi")?), h, opts.points),
        ModeChoice::Gaussian => gaussian_mode(cf, PhasePoint::new(u, need(xi, "xi")?), h, opts.points),
        ModeChoice::Boundary => {
            let opts = ModeOptions { cutoff: crate::wkb::CutoffRequest { one_sided: true, ..opts.cutoff }, ..*opts };
            BoundaryModel::new(cf, BoundaryCovector::new(need(bxi, "boundary_xi")?)?, n, &opts)?.mode(h)
        }
    }
}

pub fn cmd_mode(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let b = cfg.mode.as_ref().ok_or_else(|| missing("mode"))?;
    let cf = cfg.coefficients()?;
    let opts = cfg.modes.options();
    let mode = build_mode(&cf, b.kind, b.u, b.xi, b.boundary_xi, b.h, b.n, &opts)?;
    let r = residual_triple(&mode, &cf)?;
    mode.write_csv(sink.file("mode.csv")?)?;
    sink.json(
        "mode.json",
        &json!({ "span": mode.span(), "residual": triple_json(&r), "mode": mode }),
    )
}

pub fn cmd_boundary(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let b = cfg.boundary.as_ref().ok_or_else(|| missing("boundary"))?;
    let cf = cfg.coefficients()?;
    let band = boundary_band(&cf)?;
    write_parabola_csv(&cf, b.t_range, b.curve_points, sink.file("parabola.csv")?)?;
    let rc = RobinCondition::new(b.robin.0, b.robin.1)?;
    let model = RobinModel::new(&cf, rc, b.z, b.n, &boundary_options(cfg))?;
    let rm = model.mode(b.h)?;
    let r = residual_triple(&rm.mode, &cf)?;
    rm.mode.write_csv(sink.file("robin_mode.csv")?)?;
    sink.json(
        "boundary.json",
        &json!({
            "exit_condition": exit_condition(&cf)?, "band": band, "vertex": parabola_vertex(&cf)?,
            "z": b.z, "inside": inside_parabola(&cf, b.z)?, "roots": rm.roots,
            "coefficients": rm.coefficients, "leading": rm.leading, "bc_residual": rm.bc_residual,
            "residual": triple_json(&r), "mode": rm.mode,
        }),
    )?;
    sink.text(
        "boundary.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'Re z'\nset ylabel 'Im z'\n\
         plot 'parabola.csv' using 2:3 with lines title 'sigma(0, t)'\n",
    )
}

fn boundary_options(cfg: &RunConfig) -> ModeOptions {
    let opts = cfg.modes.options();
    ModeOptions { cutoff: crate::wkb::CutoffRequest { one_sided: true, ..opts.cutoff }, ..opts }
}

/// Relative residuals below this at every `h` mark an exact eigenfunction.
pub const EXACT_RESIDUAL: f64 = 1e-12;

fn fit_cells(h: &[f64], r: &[f64]) -> Result<[String; 4]> {
    if r.iter().all(|v| *v < EXACT_RESIDUAL) {
        return Ok(["inf".into(), String::new(), String::new(), "1".into()]);
    }
    let f = order_fit(h, r)?;
    Ok([f.slope.to_string(), f.intercept.to_string(), f.r2.to_string(), "0".into()])
}

pub fn cmd_sweep(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let b = cfg.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
    let cf = cfg.coefficients()?;
    let opts = cfg.modes.options();
    let hs = cfg.h_sweep.clone();
    let orders = match b.kind {
        ModeChoice::Rough | ModeChoice::Gaussian => vec![0],
        _ => cfg.orders(),
    };
    let kind = match (b.kind, b.z) {
        (ModeChoice::Boundary, Some(_)) => "robin",
        (ModeChoice::Boundary, None) => "boundary",
        (ModeChoice::Interior, _) => "interior",
        (ModeChoice::Rough, _) => "rough",
        (ModeChoice::Gaussian, _) => "gaussian",
    };
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &n in &orders {
        let triples: Vec<ResidualTriple> = match b.kind {
            ModeChoice::Interior => {
                let model = InteriorModel::new(&cf, PhasePoint::new(b.u, need(b.xi, "xi")?), n, &opts)?;
                hs.iter().map(|&h| residual_triple(&model.mode(h)?, &cf)).collect::<Result<_>>()?
            }
            ModeChoice::Boundary => {
                let bo = boundary_options(cfg);
                if let Some(z) = b.z {
                    let (cd, cv) = b.robin.unwrap_or((Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)));
                    let model = RobinModel::new(&cf, RobinCondition::new(cd, cv)?, z, n, &bo)?;
                    hs.iter().map(|&h| residual_triple(&model.mode(h)?.mode, &cf)).collect::<Result<_>>()?
                } else {
                    let xi = BoundaryCovector::new(need(b.boundary_xi, "boundary_xi")?)?;
                    let model = BoundaryModel::new(&cf, xi, n, &bo)?;
                    hs.iter().map(|&h| residual_triple(&model.mode(h)?, &cf)).collect::<Result<_>>()?
                }
            }
            _ => hs
                .iter()
                .map(|&h| residual_triple(&build_mode(&cf, b.kind, b.u, b.xi, None, h, n, &opts)?, &cf))
                .collect::<Result<_>>()?,
        };
        for (h, r) in hs.iter().zip(&triples) {
            rows.push(vec![
                kind.to_string(),
                n.to_string(),
                h.to_string(),
                r.r_q.to_string(),
                r.r_p.to_string(),
                r.r_l.to_string(),
            ]);
        }
        let series: [(&str, Vec<f64>); 3] = [
            ("r_q", triples.iter().map(|r| r.r_q).collect()),
            ("r_p", triples.iter().map(|r| r.r_p).collect()),
            ("r_l", triples.iter().map(|r| r.r_l).collect()),
        ];
        for (name, vals) in series {
            let [s, i, r2, exact] = fit_cells(&hs, &vals)?;
            fits.push(vec![kind.to_string(), n.to_string(), name.to_string(), s, i, r2, exact]);
        }
    }
    sink.csv("sweep.csv", &["kind", "n", "h", "r_q", "r_p", "r_l"], &rows)?;
    sink.csv("fits.csv", &["kind", "n", "quantity", "slope", "intercept", "r2", "exact"], &fits)?;
    sink.text(
        "sweep.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\nset xlabel 'h'\n\
         set ylabel 'relative residual'\nplot 'sweep.csv' using 3:6 with linespoints title 'r_L', \
         '' using 3:4 with linespoints title 'r_Q', '' using 3:5 with linespoints title 'r_P'\n",
    )
}

pub fn cmd_psgrid(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let b = cfg.psgrid.as_ref().ok_or_else(|| missing("psgrid"))?;
    let cf = cfg.coefficients()?;
    let (lo, hi) = cfg.domain;
    let op = discretize(&cf, b.h, Grid1D::new(lo, hi, b.m)?, b.bc)?;
    let mut zs = Vec::with_capacity(b.re.2 * b.im.2);
    for re in axis_points(&b.re) {
        for im in axis_points(&b.im) {
            zs.push(Complex64::new(re, im));
        }
    }
    let cells = resolvent_map(&op, &zs);
    write_resolvent_csv(&cells, sink.file("resolvent.csv")?)?;
    let unconverged = cells.iter().filter(|c| !c.converged).count();
    let mut script = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'Re z'\nset ylabel 'Im z'\n\
         set logscale cb\nset view map\nsplot 'resolvent.csv' using 1:2:3 with points palette pointtype 5 notitle",
    );
    if let Some(o) = &b.overlay {
        let mask = region_mask(&cf, &axis_points(&o.u), &axis_points(&o.xi))?;
        let rows: Vec<Vec<String>> = symbol_image(&mask, &cf)?
            .iter()
            .map(|p| vec![p.u.to_string(), p.xi.to_string(), p.sigma.re.to_string(), p.sigma.im.to_string()])
            .collect();
        sink.csv("omega_image.csv", &["u", "xi", "re_sigma", "im_sigma"], &rows)?;
        script.push_str(", 'omega_image.csv' using 3:4:(1) with dots lc rgb 'black' title 'sigma(Omega)'");
    }
    if lo == 0.0 && exit_condition(&cf)? {
        let band = boundary_band(&cf)?;
        write_parabola_csv(&cf, (-4.0 * band.1, 4.0 * band.1), 201, sink.file("parabola.csv")?)?;
        script.push_str(", 'parabola.csv' using 2:3:(1) with lines lc rgb 'red' title 'parabola'");
    }
    script.push('\n');
    sink.json(
        "psgrid.json",
        &json!({ "h": b.h, "m": b.m, "cells": cells.len(), "unconverged": unconverged }),
    )?;
    sink.text("psgrid.gp", &script)
}

pub fn cmd_fbi(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let b = cfg.fbi.as_ref().ok_or_else(|| missing("fbi"))?;
    let mut rows = Vec::new();
    for &h in &b.h {
        for &s in &b.s {
            let f = boundedness_profile(b.c6, h, s)?;
            let g = if s > 0.0 { g_profile(b.c6, h * h * s.powi(3))?.to_string() } else { String::new() };
            rows.push(vec![h.to_string(), s.to_string(), f.to_string(), g]);
        }
    }
    sink.csv("profile.csv", &["h", "s", "F", "G"], &rows)?;
    let limit = profile_limit(b.c6);
    let rows: Vec<Vec<String>> = b
        .t
        .iter()
        .map(|&t| {
            let g = g_profile(b.c6, t)?;
            Ok(vec![t.to_string(), g.to_string(), limit.to_string(), (g / limit - 1.0).to_string()])
        })
        .collect::<Result<_>>()?;
    sink.csv("g_limit.csv", &["t", "G", "limit", "relative_gap"], &rows)?;
    let mut rows = Vec::new();
    let mut norms = Vec::new();
    for &h in &b.h {
        let layout = DistortedLayout { kappa: b.kappa, h, band: b.band, refine: b.refine };
        let t = layout.build()?;
        let est = t.operator_norm();
        let iso = isometry_probe(&layout, &t, b.samples, b.seed)?;
        norms.push(est.value);
        rows.push(vec![
            h.to_string(),
            t.x.len().to_string(),
            t.grid.len().to_string(),
            est.value.to_string(),
            est.iterations.to_string(),
            (est.converged as u8).to_string(),
            iso.mean.to_string(),
            iso.spread.to_string(),
        ]);
    }
    sink.csv(
        "fbi_norms.csv",
        &["h", "x_points", "phase_points", "norm", "lanczos_steps", "converged", "isometry_mean", "isometry_spread"],
        &rows,
    )?;
    let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let mut summary = json!({
        "c6": b.c6, "limit": limit, "kappa": b.kappa,
        "norm_variation": if norms.is_empty() { 0.0 } else { (hi - lo) / lo },
    });
    if let Some(o) = &b.orthogonality {
        let cf = cfg.coefficients()?;
        let (x0, x1, nx) = o.x;
        let x = Grid1D::new(x0, x1, nx)?;
        let xi = axis_points(&o.xi);
        let gu = PhaseSpaceGrid::clipped(&cf, &axis_points(&o.u_left), &xi)?;
        let gv = PhaseSpaceGrid::clipped(&cf, &axis_points(&o.u_right), &xi)?;
        let mut rows = Vec::new();
        let (mut inv_h, mut logs) = (Vec::new(), Vec::new());
        for &h in &o.h {
            let kern = TransformKernel { kind: KernelKind::Gaussian, h };
            let tu = Transform::new(kern, Some(&cf), gu.clone(), &x)?;
            let tv = Transform::new(kern, Some(&cf), gv.clone(), &x)?;
            let v = asymptotic_orthogonality(&tu, &tv)?;
            rows.push(vec![h.to_string(), (1.0 / h).to_string(), v.to_string()]);
            inv_h.push(1.0 / h);
            logs.push(v.ln());
        }
        sink.csv("orthogonality.csv", &["h", "inv_h", "cross_gram_norm"], &rows)?;
        if o.h.len() >= 4 {
            let f = linear_fit(&inv_h, &logs)?;
            summary["orthogonality_fit"] = json!({ "slope": f.slope, "intercept": f.intercept, "r2": f.r2 });
        }
    }
    sink.json("fbi.json", &summary)?;
    sink.text(
        "fbi.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset xlabel 't'\n\
         plot 'g_limit.csv' using 1:2 with linespoints title 'G(t)', '' using 1:3 with lines title 'limit'\n",
    )
}

pub fn cmd_evolve(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let b = cfg.evolve.as_ref().ok_or_else(|| missing("evolve"))?;
    let cf = cfg.coefficients()?;
    let (lo, hi) = cfg.domain;
    let op = discretize(&cf, b.h, Grid1D::new(lo, hi, b.m)?, b.bc)?;
    let opts = cfg.modes.options();
    let mut modes = Vec::new();
    for &u in &b.u {
        for &xi in &b.xi {
            modes.push(assemble_mode(&cf, PhasePoint::new(u, xi), b.h, b.n, &opts)?);
        }
    }
    let frame = build_frame_on(&op, &modes)?.map_lambda(|z| -z);
    let a = generator(&op);
    let bound = evolution_bound(&a, &frame)?;
    let rows = semigroup_bound_check(&a, &frame, &bound, &b.t)?;
    write_bound_csv(&rows, sink.file("bound.csv")?)?;
    let ones = DVector::from_element(frame.columns(), Complex64::new(1.0, 0.0));
    let mut f = frame.synthesize(&ones)?;
    let nf = frame.norm_of(&f);
    f /= Complex64::new(nf, 0.0);
    let mut ev = Vec::new();
    for &delta in &b.deltas {
        for &t in &b.t {
            let r = evolve_approx(&a, &frame, &bound, &f, delta, t)?;
            ev.push(vec![
                t.to_string(),
                delta.to_string(),
                r.error.to_string(),
                r.budget.to_string(),
                r.recon_error.to_string(),
                r.phi_norm.to_string(),
                (r.holds as u8).to_string(),
            ]);
        }
    }
    sink.csv("evolve.csv", &["t", "delta", "error", "budget", "recon_error", "phi_norm", "holds"], &ev)?;
    let inc = pseudospectrum_inclusion(&a, &frame, 2.0 * bound.epsilon)?;
    let cells: Vec<Vec<String>> = inc
        .iter()
        .map(|r| vec![r.lambda.re.to_string(), r.lambda.im.to_string(), r.s_min.to_string(), (r.inside as u8).to_string()])
        .collect();
    sink.csv("inclusion.csv", &["re_lambda", "im_lambda", "s_min", "inside"], &cells)?;
    sink.json(
        "frame.json",
        &json!({
            "columns": frame.columns(), "epsilon": bound.epsilon, "gamma": bound.gamma, "m": bound.m,
            "condition": frame.condition_number(), "bound_holds": rows.iter().all(|r| r.holds),
            "inclusion_holds": inc.iter().all(|r| r.inside),
        }),
    )?;
    sink.text(
        "evolve.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n\
         plot 'bound.csv' using 1:2 with linespoints title 'actual', '' using 1:3 with linespoints title 'bound'\n",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    struct Outcome {
        code: i32,
        stdout: String,
        stderr: String,
    }

    fn invoke(args: &[&std::ffi::OsStr]) -> Outcome {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut argv = vec![std::ffi::OsStr::new("pseudomode")];
        argv.extend_from_slice(args);
        let code = main_with(argv, &mut out, &mut err);
        Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
    }

    fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn run_sub(sub: &str, cfg: &Path, out: &Path) -> Outcome {
        invoke(&[sub.as_ref(), "--config".as_ref(), cfg.as_os_str(), "--out".as_ref(), out.as_os_str(), "--threads".as_ref(), "2".as_ref()])
    }

    fn stderr_json(o: &Outcome) -> Value {
        serde_json::from_str(o.stderr.trim()).expect("stderr is one JSON object")
    }

    const SMALL: &[(&str, &str)] = &[
        (
            "region",
            r#"{"operator": "complex-airy", "domain": [-4, 4], "region": {"u": [-1, 1, 11], "xi": [-1, 1, 9]}}"#,
        ),
        (
            "mode",
            r#"{"operator": "complex-airy", "domain": [-10, 10], "modes": {"delta0": 8},
                "mode": {"kind": "interior", "u": 0.0, "xi": -1.0, "h": 0.02, "n": 1}}"#,
        ),
        (
            "boundary",
            r#"{"operator": "advection-exit", "domain": [0, 4],
                "boundary": {"z": [0.5, 0.1], "h": 0.02, "n": 1, "curve_points": 21}}"#,
        ),
        (
            "sweep",
            r#"{"operator": "complex-airy", "domain": [-10, 10], "orders": [0, 1],
                "h_sweep": [0.08, 0.04, 0.02, 0.01], "sweep": {"kind": "interior", "xi": -1.0}}"#,
        ),
        (
            "psgrid",
            r#"{"operator": "complex-airy", "domain": [-2, 2],
                "psgrid": {"h": 0.1, "m": 40, "re": [-1, 1, 3], "im": [-1, 1, 3],
                           "overlay": {"u": [-2, 2, 5], "xi": [-1, 0, 3]}}}"#,
        ),
        (
            "fbi",
            r#"{"operator": "complex-airy", "domain": [-10, 10],
                "fbi": {"h": [0.1], "s": [-1, 0, 1], "t": [1e-3], "samples": 3}}"#,
        ),
        (
            "evolve",
            r#"{"operator": "complex-airy", "domain": [-1.5, 1.5], "modes": {"delta0": 1},
                "evolve": {"h": 0.0625, "m": 80, "u": [-0.2, 0.2], "xi": [-0.5, -0.4],
                           "t": [0, 0.5], "deltas": [1e-2, 1e-4]}}"#,
        ),
    ];

    #[test]
    fn every_subcommand_succeeds_and_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        for (sub, body) in SMALL {
            let cfg = write_config(dir.path(), &format!("{sub}.json"), body);
            let a = dir.path().join(format!("{sub}_a"));
            let b = dir.path().join(format!("{sub}_b"));
            let oa = run_sub(sub, &cfg, &a);
            assert_eq!(oa.code, 0, "{sub}: {}", oa.stderr);
            let ob = run_sub(sub, &cfg, &b);
            assert_eq!(ob.code, 0);
            let listed: Vec<&str> = oa.stdout.lines().collect();
            assert!(!listed.is_empty(), "{sub} wrote nothing");
            for line in listed {
                let name = Path::new(line).file_name().unwrap();
                let x = std::fs::read(a.join(name)).unwrap();
                let y = std::fs::read(b.join(name)).unwrap();
                assert_eq!(x, y, "{sub}: {} differs between runs", name.to_string_lossy());
            }
        }
    }

    #[test]
    fn unknown_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "c.json",
            r#"{"operator": "complex-airy", "domain": [-1, 1], "region": {"u": [-1, 1, 3], "xi": [-1, 1, 3], "extra": 0}}"#,
        );
        let o = run_sub("region", &cfg, &dir.path().join("out"));
        assert_eq!(o.code, 2);
        let e = stderr_json(&o);
        assert_eq!(e["error"], "config");
        assert_eq!(e["exit_code"], 2);
        assert!(e["message"].as_str().unwrap().contains("extra"));
    }

    #[test]
    fn missing_block_and_bad_values_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), "c.json", r#"{"operator": "complex-airy", "domain": [-1, 1]}"#);
        assert_eq!(run_sub("sweep", &cfg, &dir.path().join("o")).code, 2);
        let cfg = write_config(
            dir.path(),
            "d.json",
            r#"{"operator": "complex-airy", "domain": [1, -1], "region": {"u": [-1, 1, 3], "xi": [-1, 1, 3]}}"#,
        );
        assert_eq!(run_sub("region", &cfg, &dir.path().join("o")).code, 2);
        let o = invoke(&["nope".as_ref()]);
        assert_eq!(o.code, 2);
        assert_eq!(stderr_json(&o)["error"], "config");
    }

    #[test]
    fn point_outside_omega_exits_3() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "c.json",
            r#"{"operator": "complex-airy", "domain": [-10, 10],
                "mode": {"kind": "interior", "u": 0.0, "xi": 1.0, "h": 0.01}}"#,
        );
        let o = run_sub("mode", &cfg, &dir.path().join("o"));
        assert_eq!(o.code, 3);
        assert_eq!(stderr_json(&o)["exit_code"], 3);
    }

    #[test]
    fn orthogonality_with_overlapping_ranges_exits_3() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "c.json",
            r#"{"operator": "complex-airy", "domain": [-10, 10],
                "fbi": {"h": [0.1], "s": [0], "t": [1e-3], "samples": 2,
                        "orthogonality": {"u_left": [-0.5, 0.1, 3], "u_right": [0.0, 0.5, 3],
                                          "xi": [-0.3, -0.2, 2], "x": [-4, 4, 401], "h": [0.2]}}}"#,
        );
        let o = run_sub("fbi", &cfg, &dir.path().join("o"));
        assert_eq!(o.code, 3, "{}", o.stderr);
    }

    #[test]
    fn help_exits_0() {
        let o = invoke(&["--help".as_ref()]);
        assert_eq!(o.code, 0);
        let text = &o.stdout;
        for sub in ["region", "mode", "boundary", "sweep", "psgrid", "fbi", "evolve"] {
            assert!(text.contains(sub));
        }
    }

    #[test]
    fn empty_z_grid_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "c.json",
            r#"{"operator": "complex-airy", "domain": [-1, 1],
                "psgrid": {"h": 0.1, "m": 20, "re": [0, 0, 0], "im": [-1, 1, 3]}}"#,
        );
        let o = run_sub("psgrid", &cfg, &dir.path().join("o"));
        assert_eq!(o.code, 0, "{}", o.stderr);
        let text = std::fs::read_to_string(dir.path().join("o/resolvent.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn exact_eigenfunction_rows_carry_the_flag() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "c.json",
            r#"{"operator": "advection-exit", "domain": [0, 8], "modes": {"delta0": 4},
                "orders": [0], "h_sweep": [0.015625, 0.0078125, 0.00390625, 0.001953125],
                "sweep": {"kind": "boundary", "z": [0.2, 0], "robin": [[1, 0], [1, 0]]}}"#,
        );
        let o = run_sub("sweep", &cfg, &dir.path().join("o"));
        assert_eq!(o.code, 0, "{}", o.stderr);
        let fits = std::fs::read_to_string(dir.path().join("o/fits.csv")).unwrap();
        let row = fits.lines().find(|l| l.contains(",r_l,")).unwrap();
        assert!(row.contains(",inf,") && row.ends_with(",1"), "{row}");
    }
}
