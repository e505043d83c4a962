//! Config-driven command-line front end.
//!
//! Every command reads one JSON document (see [`RunConfig`]) and writes its
//! results into the output directory. Exit codes: 0 success, 1 bad
//! configuration or I/O, 2 integration failures, 3 failed invariant check.

mod config;
mod output;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{
    certify, enclosure_curves, enclosure_params, h_threshold, violation_tolerance, ConfinementReport,
    EnclosureParams,
};
use crate::error::Error;
use crate::oracle::ConstantModel;
use crate::potentials::{PeriodicPotential, PotentialNorms, SymmetryFlags, DEFAULT_NORM_SAMPLES};
use crate::spectrum::{
    bloch_eigenfunction, discriminant_field, trace_spectrum, verify_imag_identity, DiscriminantField,
    SpectrumArcs, DEFAULT_BLOCH_SAMPLES,
};
use crate::symmetry::{check_monodromy_symmetry, check_spectrum_symmetry};
use crate::transfer::{integrate_monodromy, IntegratorConfig};

pub use config::{ConfigError, FourierTerm, Outputs, PotentialSpec, RunConfig, Tolerances, SCHEMA_VERSION};
pub use output::{h_tag, spectrum_csv, SvgPlot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INTEGRATION: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dirac-floquet", version, about = "Floquet spectra of periodic non-self-adjoint Dirac operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run a single semiclassical parameter instead of `h_list`.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Suppress progress and tables on standard output.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Trace the spectrum for each h.
    Spectrum,
    /// Trace and certify against the enclosure bounds.
    Bounds,
    /// Cross distance and enclosure constants across h.
    Sweep,
    /// Compare the integrator with the closed form (constant potentials).
    Oracle,
    /// Run the invariant suite and print a pass/fail table.
    Check,
}

/// Parses `args` and runs the selected command, returning the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config is required");
        return EXIT_CONFIG;
    };
    let mut cfg = match RunConfig::load(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(h) = cli.h {
        cfg.h_list = vec![h];
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    run(cli.command, &cfg, cli.quiet)
}

/// Runs `command` on an already validated configuration.
pub fn run(command: Command, cfg: &RunConfig, quiet: bool) -> i32 {
    let ctx = match Context::new(cfg, quiet) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match command {
        Command::Spectrum => cmd_spectrum(&ctx),
        Command::Bounds => cmd_bounds(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::Oracle => cmd_oracle(&ctx),
        Command::Check => cmd_check(&ctx),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

struct Context<'a> {
    cfg: &'a RunConfig,
    pot: PeriodicPotential,
    integrator: IntegratorConfig,
    norms: PotentialNorms,
    flags: SymmetryFlags,
    quiet: bool,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a RunConfig, quiet: bool) -> crate::Result<Self> {
        let pot = cfg.potential.build()?;
        let norms = pot.sup_norms(DEFAULT_NORM_SAMPLES)?;
        let flags = pot.detect_symmetries(&norms, cfg.tolerances.symmetry_tol)?;
        Ok(Self {
            cfg,
            pot,
            integrator: cfg.integrator_config(),
            norms,
            flags,
            quiet,
        })
    }

    fn say(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }

    fn out_path(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.cfg.out_dir)?;
        Ok(self.cfg.out_dir.join(name))
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out_path(name)?;
        output::write_file(&path, contents)?;
        Ok(())
    }

    fn write_report(&self, value: &serde_json::Value) -> Result<(), CliError> {
        if self.cfg.outputs.json {
            self.write("report.json", &(serde_json::to_string_pretty(value)? + "\n"))?;
        }
        Ok(())
    }

    fn field(&self, h: f64) -> crate::Result<DiscriminantField> {
        let [nx, ny] = self.cfg.grid;
        discriminant_field(&self.pot, h, self.cfg.window, nx, ny, &self.integrator)
    }

    fn params(&self, h: f64) -> crate::Result<EnclosureParams> {
        enclosure_params(&self.norms, &self.flags, h)
    }

    /// Branch points for constant potentials, band-edge vertices otherwise.
    fn markers(&self, arcs: &SpectrumArcs) -> Vec<Complex64> {
        match self.pot.constant_values() {
            Some((p0, q0)) => {
                let w = (p0 * q0).sqrt();
                if w.norm() == 0.0 {
                    vec![w]
                } else {
                    vec![w, -w]
                }
            }
            None => arcs
                .arcs
                .iter()
                .flatten()
                .filter(|p| p.band_edge)
                .map(|p| p.z)
                .collect(),
        }
    }
}

/// Field, arcs and file output for one `h`.
struct Traced {
    arcs: SpectrumArcs,
    band_ids: Vec<usize>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    h: f64,
    n_arcs: usize,
    n_vertices: usize,
    n_flagged: usize,
    n_contours: usize,
    axis_bands: Vec<[f64; 2]>,
    axis_band_arc_ids: Vec<usize>,
    cell_size: (f64, f64),
}

impl SpectrumSummary {
    fn of(t: &Traced) -> Self {
        Self {
            h: t.arcs.h,
            n_arcs: t.arcs.arcs.len(),
            n_vertices: t.arcs.vertex_count(),
            n_flagged: t.arcs.flagged.len(),
            n_contours: t.arcs.contours.len(),
            axis_bands: t.arcs.axis_bands.clone(),
            axis_band_arc_ids: t.band_ids.clone(),
            cell_size: t.arcs.cell,
        }
    }
}

/// Traces one `h` and writes its CSV and SVG. Integration failures are
/// returned as `Err` so the caller can report them and carry on.
fn trace_and_emit(ctx: &Context, h: f64) -> Result<Result<Traced, String>, CliError> {
    let field = match ctx.field(h) {
        Ok(f) => f,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let arcs = match trace_spectrum(&field, ctx.cfg.tolerances.trace_tol) {
        Ok(a) => a,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let mut band_delta = Vec::with_capacity(arcs.axis_bands.len());
    for band in &arcs.axis_bands {
        let mut pair = [0.0; 2];
        for (slot, &x) in pair.iter_mut().zip(band) {
            match field.discriminant_at(Complex64::new(x, 0.0)) {
                Ok(d) => *slot = d.re,
                Err(e) => return Ok(Err(e.to_string())),
            }
        }
        band_delta.push(pair);
    }
    let (csv, band_ids) = spectrum_csv(&arcs, &band_delta);
    let tag = h_tag(h);
    if ctx.cfg.outputs.csv {
        ctx.write(&format!("spectrum_h{tag}.csv"), &csv)?;
    }
    if ctx.cfg.outputs.svg {
        let params = ctx.params(h).map_err(|e| CliError::Config(e.to_string()))?;
        let curves = enclosure_curves(&params, &arcs.window, 801);
        let polylines = arcs.polylines();
        let markers = ctx.markers(&arcs);
        let plot = SvgPlot {
            window: arcs.window,
            title: format!("spectrum, h = {tag}"),
            enclosure: Some(&curves),
            contours: &arcs.contours,
            arcs: &polylines,
            markers: &markers,
        };
        ctx.write(&format!("spectrum_h{tag}.svg"), &plot.render())?;
    }
    Ok(Ok(Traced {
        arcs,
        band_ids,
    }))
}

fn failure_entry(h: f64, msg: &str) -> serde_json::Value {
    json!({ "h": h, "error": msg })
}

fn cmd_spectrum(ctx: &Context) -> Result<i32, CliError> {
    let mut runs = Vec::new();
    let mut failures = 0;
    for &h in &ctx.cfg.h_list {
        match trace_and_emit(ctx, h)? {
            Ok(t) => {
                let s = SpectrumSummary::of(&t);
                ctx.say(&format!(
                    "h = {h}: {} arcs, {} vertices, {} flagged, {} axis bands",
                    s.n_arcs,
                    s.n_vertices,
                    s.n_flagged,
                    s.axis_bands.len()
                ));
                runs.push(serde_json::to_value(s)?);
            }
            Err(msg) => {
                eprintln!("h = {h}: {msg}");
                failures += 1;
                runs.push(failure_entry(h, &msg));
            }
        }
    }
    ctx.write_report(&json!({ "command": "spectrum", "config": ctx.cfg, "runs": runs }))?;
    Ok(if failures > 0 { EXIT_INTEGRATION } else { EXIT_OK })
}

fn cmd_bounds(ctx: &Context) -> Result<i32, CliError> {
    let mut runs = Vec::new();
    let mut failures = 0;
    for &h in &ctx.cfg.h_list {
        match trace_and_emit(ctx, h)? {
            Ok(t) => {
                let report = certified(ctx, &t.arcs)?;
                ctx.say(&format!(
                    "h = {h}: strip {}, hyperbola {}, max cross distance {:.6}",
                    verdict(report.verdict.strip),
                    verdict(report.verdict.hyperbola),
                    report.max_cross_distance
                ));
                runs.push(json!({ "spectrum": SpectrumSummary::of(&t), "confinement": report }));
            }
            Err(msg) => {
                eprintln!("h = {h}: {msg}");
                failures += 1;
                runs.push(failure_entry(h, &msg));
            }
        }
    }
    ctx.write_report(&json!({
        "command": "bounds",
        "config": ctx.cfg,
        "norms": ctx.norms,
        "flags": ctx.flags,
        "runs": runs,
    }))?;
    Ok(if failures > 0 { EXIT_INTEGRATION } else { EXIT_OK })
}

fn certified(ctx: &Context, arcs: &SpectrumArcs) -> Result<ConfinementReport, CliError> {
    let params = ctx.params(arcs.h).map_err(|e| CliError::Config(e.to_string()))?;
    certify(arcs, &params, ctx.cfg.delta).map_err(|e| CliError::Config(e.to_string()))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_sweep(ctx: &Context) -> Result<i32, CliError> {
    if ctx.cfg.h_list.len() < 3 {
        return Err(CliError::Config("sweep needs at least 3 values in h_list".into()));
    }
    let mut csv = String::from("h,max_cross_distance,b1,c_big_h,c_small_h,h0,below_h0,within_delta\n");
    let mut rows = Vec::new();
    let mut failures = 0;
    let h0 = h_threshold(ctx.cfg.delta, ctx.params(1.0).map(|p| p.c0).unwrap_or(0.0));
    for &h in &ctx.cfg.h_list {
        match trace_and_emit(ctx, h)? {
            Ok(t) => {
                let r = certified(ctx, &t.arcs)?;
                let below = ctx.flags.pq_real && h < h0;
                let within = r.max_cross_distance <= ctx.cfg.delta;
                let _ = writeln!(
                    csv,
                    "{h},{},{},{},{},{h0},{below},{within}",
                    r.max_cross_distance,
                    r.params.b1,
                    r.params.c_big_h,
                    opt_num(r.params.c_small_h)
                );
                ctx.say(&format!("h = {h}: max cross distance {:.6}", r.max_cross_distance));
                rows.push(json!({ "h": h, "max_cross_distance": r.max_cross_distance, "below_h0": below, "within_delta": within }));
            }
            Err(msg) => {
                eprintln!("h = {h}: {msg}");
                failures += 1;
                rows.push(failure_entry(h, &msg));
            }
        }
    }
    if ctx.cfg.outputs.csv {
        ctx.write("sweep.csv", &csv)?;
    }
    ctx.write_report(&json!({ "command": "sweep", "config": ctx.cfg, "h0": h0, "rows": rows }))?;
    Ok(if failures > 0 { EXIT_INTEGRATION } else { EXIT_OK })
}

/// Nodes of a coarse `n × n` grid over the configured window.
fn sample_grid(ctx: &Context, n: usize) -> Vec<Complex64> {
    let w = &ctx.cfg.window;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(Complex64::new(
                w.re[0] + (w.re[1] - w.re[0]) * i as f64 / (n - 1) as f64,
                w.im[0] + (w.im[1] - w.im[0]) * j as f64 / (n - 1) as f64,
            ));
        }
    }
    out
}

fn cmd_oracle(ctx: &Context) -> Result<i32, CliError> {
    let Some((p0, q0)) = ctx.pot.constant_values() else {
        return Err(CliError::Config("oracle needs a constant potential".into()));
    };
    let [nx, ny] = ctx.cfg.grid;
    let mut runs = Vec::new();
    let mut failures = 0;
    for &h in &ctx.cfg.h_list {
        let model = ConstantModel::new(p0, q0, h).map_err(|e| CliError::Config(e.to_string()))?;
        let mut csv = String::from("re_z,im_z,re_delta,im_delta,member,rel_err\n");
        let mut worst = 0.0f64;
        let mut failed = 0;
        let w = &ctx.cfg.window;
        for i in 0..nx {
            for j in 0..ny {
                let z = Complex64::new(
                    w.re[0] + (w.re[1] - w.re[0]) * i as f64 / (nx - 1) as f64,
                    w.im[0] + (w.im[1] - w.im[0]) * j as f64 / (ny - 1) as f64,
                );
                let exact = model.monodromy(z);
                let d = model.discriminant(z);
                let err = match integrate_monodromy(&ctx.pot, z, h, &ctx.integrator) {
                    Ok(r) => (r.monodromy - exact).frobenius() / exact.frobenius(),
                    Err(_) => {
                        failed += 1;
                        f64::NAN
                    }
                };
                if err.is_finite() {
                    worst = worst.max(err);
                }
                let member = model.spectrum_membership(z, ctx.cfg.tolerances.trace_tol);
                let _ = writeln!(csv, "{},{},{},{},{member},{err}", z.re, z.im, d.re, d.im);
            }
        }
        if ctx.cfg.outputs.csv {
            ctx.write(&format!("oracle_h{}.csv", h_tag(h)), &csv)?;
        }
        ctx.say(&format!("h = {h}: max relative monodromy error {worst:.3e}, {failed} failures"));
        failures += failed;
        runs.push(json!({ "h": h, "max_rel_err": worst, "failures": failed, "branch_points": model.branch_points() }));
    }
    ctx.write_report(&json!({ "command": "oracle", "config": ctx.cfg, "runs": runs }))?;
    Ok(if failures > 0 { EXIT_INTEGRATION } else { EXIT_OK })
}

#[derive(Debug, Clone, Serialize)]
struct CheckRow {
    h: f64,
    name: String,
    value: f64,
    limit: f64,
    pass: bool,
}

impl CheckRow {
    fn new(h: f64, name: &str, value: f64, limit: f64) -> Self {
        Self::judged(h, name, value, limit, value <= limit)
    }

    fn judged(h: f64, name: &str, value: f64, limit: f64, pass: bool) -> Self {
        Self {
            h,
            name: name.into(),
            value,
            limit,
            pass,
        }
    }
}

fn cmd_check(ctx: &Context) -> Result<i32, CliError> {
    let mut rows: Vec<CheckRow> = Vec::new();
    let mut integration_failures = 0;
    let samples = sample_grid(ctx, 10);
    for &h in &ctx.cfg.h_list {
        // Determinant, reciprocity and (for constants) the closed form.
        let model = ctx
            .pot
            .constant_values()
            .map(|(p0, q0)| ConstantModel::new(p0, q0, h))
            .transpose()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let (mut det, mut recip, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
        for &z in &samples {
            match integrate_monodromy(&ctx.pot, z, h, &ctx.integrator) {
                Ok(r) => {
                    det = det.max(r.det_defect / r.monodromy.frobenius().powi(2).max(1.0));
                    recip = recip.max((r.multipliers.0 * r.multipliers.1 - 1.0).norm());
                    if let Some(m) = &model {
                        let exact = m.monodromy(z);
                        oracle = oracle.max((r.monodromy - exact).frobenius() / exact.frobenius());
                    }
                }
                Err(_) => integration_failures += 1,
            }
        }
        rows.push(CheckRow::new(h, "det_defect", det, 1e-10));
        rows.push(CheckRow::new(h, "multiplier_reciprocity", recip, 1e-10));
        if model.is_some() {
            rows.push(CheckRow::new(h, "oracle_equivalence", oracle, 1e-8));
        }

        if ctx.flags.any() {
            match check_monodromy_symmetry(&ctx.pot, &ctx.flags, h, &samples, &ctx.integrator) {
                Ok(res) => {
                    for r in res {
                        rows.push(CheckRow::new(h, &format!("monodromy_{}", relation_name(&r.relation)), r.max_defect, 1e-8));
                    }
                }
                Err(_) => integration_failures += 1,
            }
        }

        let traced = match ctx.field(h).and_then(|f| trace_spectrum(&f, ctx.cfg.tolerances.trace_tol)) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("h = {h}: {e}");
                integration_failures += 1;
                continue;
            }
        };
        let cell = traced.cell.0.max(traced.cell.1);
        let report = certified(ctx, &traced)?;
        // Violations are judged pointwise against 1e-6·(1 + |z|²); the limit
        // column shows the bound at the window corner.
        let w = &ctx.cfg.window;
        let corner = violation_tolerance(Complex64::new(
            w.re[0].abs().max(w.re[1].abs()),
            w.im[0].abs().max(w.im[1].abs()),
        ));
        rows.push(CheckRow::judged(h, "strip_violation", report.max_strip_violation, corner, report.verdict.strip));
        rows.push(CheckRow::judged(h, "hyperbola_violation", report.max_hyperbola_violation, corner, report.verdict.hyperbola));
        if let (Some(v), Some(ok)) = (report.max_sharp_hyperbola_violation, report.verdict.sharp_hyperbola) {
            rows.push(CheckRow::judged(h, "sharp_hyperbola_violation", v, corner, ok));
        }
        if !traced.is_empty() {
            if let Ok(res) = check_spectrum_symmetry(&traced, &ctx.flags) {
                for r in res {
                    rows.push(CheckRow::new(h, &relation_name(&r.relation), r.max_defect, 2.0 * cell));
                }
            }
        }

        let (vertex, identity) = vertex_checks(ctx, &traced, &mut integration_failures);
        rows.push(CheckRow::new(h, "vertex_membership", vertex, ctx.cfg.tolerances.trace_tol));
        rows.push(CheckRow::new(h, "flagged_vertices", traced.flagged.len() as f64, 0.0));
        if let Some(id) = identity {
            rows.push(CheckRow::new(h, "imag_identity", id, 1e-6));
        }
    }

    let mut table = String::new();
    for r in &rows {
        let _ = writeln!(
            table,
            "{}  h={:<8} {:<34} {:.3e} (limit {:.1e})",
            verdict(r.pass),
            r.h,
            r.name,
            r.value,
            r.limit
        );
    }
    ctx.say(table.trim_end());
    ctx.write_report(&json!({ "command": "check", "config": ctx.cfg, "checks": rows }))?;
    Ok(if integration_failures > 0 {
        EXIT_INTEGRATION
    } else if rows.iter().any(|r| !r.pass) {
        EXIT_INVARIANT
    } else {
        EXIT_OK
    })
}

fn relation_name(r: &crate::symmetry::SymmetryRelation) -> String {
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Re-evaluates a spread of arc vertices, returning the worst membership
/// excess and the worst imaginary-identity error at interior band points.
fn vertex_checks(ctx: &Context, arcs: &SpectrumArcs, failures: &mut usize) -> (f64, Option<f64>) {
    let vertices: Vec<_> = arcs.arcs.iter().flatten().collect();
    let stride = (vertices.len() / 40).max(1);
    let mut worst = 0.0f64;
    for p in vertices.iter().step_by(stride) {
        match integrate_monodromy(&ctx.pot, p.z, arcs.h, &ctx.integrator) {
            Ok(r) => {
                let d = r.delta;
                let excess = d.im.abs().max(d.re.abs() - 1.0).max(0.0);
                worst = worst.max(excess);
            }
            Err(_) => *failures += 1,
        }
    }

    // Interior points: |Re Δ| well below 1 keeps them away from band edges.
    let mut interior: Vec<Complex64> = vertices
        .iter()
        .filter(|p| !p.band_edge && p.re_delta.abs() < 0.9)
        .map(|p| p.z)
        .collect();
    interior.extend(arcs.axis_bands.iter().map(|b| Complex64::new(0.5 * (b[0] + b[1]), 0.0)));
    let stride = (interior.len() / 5).max(1);
    let mut id_worst: Option<f64> = None;
    for &z in interior.iter().step_by(stride).take(5) {
        match bloch_eigenfunction(&ctx.pot, arcs.h, z, &ctx.integrator, DEFAULT_BLOCH_SAMPLES, arcs.trace_tol) {
            Ok(f) => {
                let e = verify_imag_identity(&ctx.pot, &f).max_rel_err;
                id_worst = Some(id_worst.unwrap_or(0.0).max(e));
            }
            Err(Error::NotOnSpectrum { .. } | Error::DefectiveMonodromy { .. }) => {}
            Err(_) => *failures += 1,
        }
    }
    (worst, id_worst)
}
