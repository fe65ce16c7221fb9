//! The `critset` command line: one subcommand per pipeline stage, JSON
//! reports, geometry exports.

mod config;
mod selftest;

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{ModulusDecl, RunArgs, RunConfig};
pub use selftest::{run_selftest, Check};

use crate::adversary::{adversarial_f, count_critical_sheets, lower_bound_n, sandwich, LowerBoundCertificate, OscillatoryFunction, Sandwich, SheetCount};
use crate::decomposition::{simplex_dump_json, CubeDecomposition, CubeGrid, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::expr::parse_function;
use crate::map::DifferentiableMap;
use crate::measure::{critical_set_mask, critical_set_pieces, measure_critical_set, measure_determinant_zero_set, zero_set_pieces, CriticalSetMeasure, MaskTolerance, MeasureEstimate, Pieces, Region};
use crate::modulus::{Modulus, DEFAULT_TOL_REL};
use crate::perturbation::{verify_c1, BlendedApproximant, C1Check, Certificate, StorePolicy, UpperBound};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RANGE: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "critset", version, about = "Critical sets of C^1 maps on the unit cube: perturb, bound, measure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the simplicial decomposition of the cube lattice.
    Decompose(DecomposeArgs),
    /// Upper (and optionally lower) bounds on the critical-set measure.
    Bound(ReportArgs),
    /// Build the blended approximant, check it and measure its critical set.
    Perturb(ReportArgs),
    /// Measure the critical set of the function itself.
    Measure(ReportArgs),
    /// Lower-bound certificates for the oscillatory construction.
    Adversary(ReportArgs),
    /// Run the invariant suite.
    Selftest,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Print an aligned table instead of JSON.
    #[arg(long)]
    pub table: bool,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::EpsilonRange { .. } | Error::MeshCoarserThanDomain { .. } => EXIT_RANGE,
        Error::Numerical(_) | Error::OutsideCube { .. } => EXIT_INTERNAL,
        _ => EXIT_CONFIG,
    }
}

/// An error recorded inside a report instead of aborting it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub exit_code: u8,
    pub message: String,
}

impl From<&Error> for ErrorEntry {
    fn from(e: &Error) -> Self {
        ErrorEntry { exit_code: exit_code(e), message: e.to_string() }
    }
}

#[derive(Debug, Serialize)]
struct Tolerances {
    sigma_tol_rel: f64,
    delta_solver_tol_rel: f64,
    membership_tol: f64,
    mask: MaskTolerance,
}

#[derive(Debug, Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    config: &'a RunConfig,
    tolerances: Tolerances,
    results: T,
}

pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let code = match run(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::ExitCode::from(code)
}

/// Runs one command, writing its report to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    match &cli.command {
        Command::Decompose(args) => cmd_decompose(args, out),
        Command::Selftest => {
            let checks = run_selftest();
            for c in &checks {
                writeln!(out, "{} {:<40} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_INTERNAL })
        }
        Command::Bound(args) => {
            let cfg = args.run.resolve()?;
            let (rows, code) = cmd_bound(&cfg)?;
            if args.table {
                out.write_all(bound_table(&rows).as_bytes())?;
            }
            emit("bound", &cfg, &rows, out, !args.table)?;
            Ok(code)
        }
        Command::Perturb(args) => {
            let cfg = args.run.resolve()?;
            let (rows, code) = cmd_perturb(&cfg)?;
            emit("perturb", &cfg, &rows, out, true)?;
            Ok(code)
        }
        Command::Measure(args) => {
            let cfg = args.run.resolve()?;
            let result = cmd_measure(&cfg)?;
            emit("measure", &cfg, &result, out, true)?;
            Ok(EXIT_OK)
        }
        Command::Adversary(args) => {
            let cfg = args.run.resolve()?;
            let (rows, code) = cmd_adversary(&cfg)?;
            emit("adversary", &cfg, &rows, out, true)?;
            Ok(code)
        }
    }
}

fn mask_tolerance(cfg: &RunConfig) -> MaskTolerance {
    cfg.mask_tolerance.map_or(MaskTolerance::CellScaled, MaskTolerance::Absolute)
}

fn emit<T: Serialize>(command: &str, cfg: &RunConfig, results: &T, out: &mut dyn Write, to_stdout: bool) -> Result<()> {
    let report = Report {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        config: cfg,
        tolerances: Tolerances {
            sigma_tol_rel: cfg.sigma_tol_rel,
            delta_solver_tol_rel: DEFAULT_TOL_REL,
            membership_tol: MEMBERSHIP_TOL,
            mask: mask_tolerance(cfg),
        },
        results,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    if let Some(dir) = &cfg.output {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), &text)?;
    }
    if to_stdout {
        out.write_all(text.as_bytes())?;
    }
    Ok(())
}

fn source(cfg: &RunConfig) -> Result<Arc<dyn DifferentiableMap>> {
    let src = cfg.function.as_deref().ok_or_else(|| Error::Argument("missing --function".into()))?;
    Ok(Arc::new(parse_function(src, cfg.d, cfg.m)?))
}

fn modulus(cfg: &RunConfig, f: Option<&dyn DifferentiableMap>) -> Result<Modulus> {
    cfg.modulus
        .as_ref()
        .ok_or_else(|| Error::Argument("missing --modulus".into()))?
        .resolve(cfg.d, f, cfg.seed)
}

fn cmd_decompose(args: &DecomposeArgs, out: &mut dyn Write) -> Result<u8> {
    #[derive(Serialize)]
    struct Summary {
        d: usize,
        delta: f64,
        cubes_per_axis: u64,
        simplices: String,
        simplex_volume: f64,
        file: Option<String>,
    }
    let dec = CubeDecomposition::new(args.d)?;
    let grid = CubeGrid::new(args.d, args.delta)?;
    let file = match &args.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join("simplices.json");
            fs::write(&path, simplex_dump_json(&grid, &dec)?)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let summary = Summary {
        d: args.d,
        delta: args.delta,
        cubes_per_axis: grid.per_axis,
        simplices: grid.simplex_count(&dec).to_string(),
        simplex_volume: grid.simplex(&dec, 0, 0).volume(),
        file,
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub epsilon: f64,
    pub upper: Option<UpperBound>,
    pub lower: Option<LowerBoundCertificate>,
    pub errors: Vec<ErrorEntry>,
}

fn cmd_bound(cfg: &RunConfig) -> Result<(Vec<BoundRow>, u8)> {
    let f = match (&cfg.modulus, &cfg.function) {
        (Some(ModulusDecl::Estimate { .. }), _) | (_, Some(_)) => Some(source(cfg)?),
        _ => None,
    };
    let omega = modulus(cfg, f.as_deref())?;
    if cfg.epsilon.is_empty() {
        return Err(Error::Argument("missing --eps".into()));
    }
    let profile = if cfg.adversary { Some(OscillatoryFunction::new(omega.clone(), cfg.d, cfg.m)?) } else { None };
    let mut code = EXIT_OK;
    let rows = cfg
        .epsilon
        .iter()
        .map(|&eps| {
            let mut errors = Vec::new();
            let upper = UpperBound::compute(cfg.d, cfg.m, eps, &omega).map_err(|e| errors.push(ErrorEntry::from(&e))).ok();
            let lower = profile
                .as_ref()
                .and_then(|p| lower_bound_n(p, eps).map_err(|e| errors.push(ErrorEntry::from(&e))).ok());
            code = errors.iter().map(|e| e.exit_code).fold(code, u8::max);
            BoundRow { epsilon: eps, upper, lower, errors }
        })
        .collect();
    Ok((rows, code))
}

fn bound_table(rows: &[BoundRow]) -> String {
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6e}"));
    let mut s = format!(
        "{:>14} {:>14} {:>14} {:>14} {:>14} {:>4} {:>10} {:>14}\n",
        "epsilon", "delta", "theorem", "remark", "holder", "n0", "count", "formula"
    );
    for r in rows {
        let u = r.upper.as_ref();
        let l = r.lower.as_ref();
        let _ = writeln!(
            s,
            "{:>14} {:>14} {:>14} {:>14} {:>14} {:>4} {:>10} {:>14}",
            format!("{:.6e}", r.epsilon),
            cell(u.map(|u| u.delta)),
            cell(u.map(|u| u.theorem)),
            cell(u.and_then(|u| u.remark)),
            cell(u.and_then(|u| u.holder_closed_form)),
            l.map_or("-".into(), |l| l.n0.to_string()),
            l.map_or("-".into(), |l| l.count_bound.to_string()),
            cell(l.map(|l| l.formula_bound)),
        );
        for e in &r.errors {
            let _ = writeln!(s, "{:>14} error: {}", "", e.message);
        }
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbRow {
    pub epsilon: Option<f64>,
    pub certificate: Option<Certificate>,
    pub c1_check: Option<C1Check>,
    pub upper: Option<UpperBound>,
    pub measurement: Option<CriticalSetMeasure>,
    /// Measured over bound.
    pub ratio: Option<f64>,
    pub geometry: Option<String>,
    pub errors: Vec<ErrorEntry>,
}

fn cmd_perturb(cfg: &RunConfig) -> Result<(Vec<PerturbRow>, u8)> {
    let f = source(cfg)?;
    let omega = modulus(cfg, Some(f.as_ref()))?;
    let targets: Vec<(Option<f64>, Option<f64>)> = match cfg.delta {
        Some(delta) => vec![(None, Some(delta))],
        None if cfg.epsilon.is_empty() => return Err(Error::Argument("missing --eps or --delta".into())),
        None => cfg.epsilon.iter().map(|&e| (Some(e), None)).collect(),
    };
    let mut code = EXIT_OK;
    let mut rows = Vec::new();
    for (i, (eps, delta)) in targets.into_iter().enumerate() {
        let mut row = PerturbRow {
            epsilon: eps,
            certificate: None,
            c1_check: None,
            upper: None,
            measurement: None,
            ratio: None,
            geometry: None,
            errors: Vec::new(),
        };
        let built = match (eps, delta) {
            (Some(e), _) => BlendedApproximant::calibrated(f.clone(), e, &omega, StorePolicy::Auto),
            (_, Some(d)) => BlendedApproximant::with_mesh(f.clone(), d, StorePolicy::Auto),
            _ => unreachable!("one target is always set"),
        };
        let g = match built {
            Ok(g) => g.with_sigma_tol_rel(cfg.sigma_tol_rel),
            Err(e) => {
                row.errors.push(ErrorEntry::from(&e));
                code = code.max(exit_code(&e));
                rows.push(row);
                continue;
            }
        };
        row.certificate = Some(g.certificate().clone());
        let note = |r: Result<()>, row: &mut PerturbRow| {
            if let Err(e) = r {
                row.errors.push(ErrorEntry::from(&e));
            }
        };
        let r = verify_c1(&g, &omega, cfg.samples, cfg.seed).map(|c| row.c1_check = Some(c));
        note(r, &mut row);
        if let Some(e) = eps {
            let r = UpperBound::compute(cfg.d, cfg.m, e, &omega).map(|u| row.upper = Some(u));
            note(r, &mut row);
        }
        let r = measure_critical_set(&g, cfg.resolution, mask_tolerance(cfg)).map(|m| row.measurement = Some(m));
        note(r, &mut row);
        if let (Some(m), Some(u)) = (&row.measurement, &row.upper) {
            row.ratio = Some(m.unmasked.value / u.theorem);
        }
        if row.measurement.is_some() {
            if let Some(dir) = &cfg.output {
                let r = critical_set_pieces(&g, cfg.resolution)
                    .and_then(|p| write_geometry(dir, &format!("critical_set_{i}"), cfg.d, &p))
                    .map(|name| row.geometry = name);
                note(r, &mut row);
            }
        }
        rows.push(row);
    }
    Ok((rows, code))
}

fn write_geometry(dir: &Path, stem: &str, d: usize, pieces: &Pieces) -> Result<Option<String>> {
    let (name, text) = match d {
        2 => (format!("{stem}.csv"), pieces.segments_csv()),
        3 => (format!("{stem}.stl"), pieces.triangles_stl(stem)),
        _ => return Ok(None),
    };
    fs::create_dir_all(dir)?;
    fs::write(dir.join(&name), text)?;
    Ok(Some(name))
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureResult {
    /// `H^{d-1}` of `{det L(Df) = 0}`.
    pub zero_set: MeasureEstimate,
    /// Cells where `Df` may be rank deficient.
    pub masked_cells: usize,
    pub cells: usize,
    pub geometry: Option<String>,
}

fn cmd_measure(cfg: &RunConfig) -> Result<MeasureResult> {
    let f = source(cfg)?;
    let d = cfg.d;
    let res = cfg.resolution;
    let zero_set = measure_determinant_zero_set(f.as_ref(), &vec![0.0; d], &vec![1.0; d], &vec![res; d])?;
    let mask = critical_set_mask(f.as_ref(), res.max(8), mask_tolerance(cfg))?;
    let geometry = match &cfg.output {
        Some(dir) => {
            let det = |x: &[f64]| f.jacobian(x).map_or(f64::NAN, |j| j.leading_minor_det());
            let pieces = zero_set_pieces(&det, &Region::unit_cube(d), res)?;
            write_geometry(dir, "critical_set", d, &pieces)?
        }
        None => None,
    };
    Ok(MeasureResult {
        zero_set,
        masked_cells: mask.marked(),
        cells: mask.cells.len(),
        geometry,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryRow {
    pub epsilon: f64,
    pub certificate: Option<LowerBoundCertificate>,
    /// Intervals with a zero of `det L(Df)` for the map itself.
    pub sheets: Option<SheetCount>,
    pub sandwich: Option<Sandwich>,
    pub errors: Vec<ErrorEntry>,
}

fn cmd_adversary(cfg: &RunConfig) -> Result<(Vec<AdversaryRow>, u8)> {
    let omega = match &cfg.modulus {
        Some(ModulusDecl::Estimate { .. }) => {
            return Err(Error::Argument("the adversarial construction needs a declared modulus".into()))
        }
        _ => modulus(cfg, None)?,
    };
    if cfg.epsilon.is_empty() {
        return Err(Error::Argument("missing --eps".into()));
    }
    let profile = OscillatoryFunction::new(omega, cfg.d, cfg.m)?;
    let map = adversarial_f(&profile);
    let mut code = EXIT_OK;
    let rows = cfg
        .epsilon
        .iter()
        .map(|&eps| {
            let mut row = AdversaryRow { epsilon: eps, certificate: None, sheets: None, sandwich: None, errors: Vec::new() };
            match lower_bound_n(&profile, eps) {
                Ok(c) => row.certificate = Some(c),
                Err(e) => row.errors.push(ErrorEntry::from(&e)),
            }
            if row.certificate.is_some() {
                match count_critical_sheets(&map, &profile, eps, cfg.lines, cfg.seed) {
                    Ok(s) => row.sheets = Some(s),
                    Err(e) => row.errors.push(ErrorEntry::from(&e)),
                }
                if cfg.sandwich {
                    match sandwich(&profile, eps) {
                        Ok(s) => row.sandwich = Some(s),
                        Err(e) => row.errors.push(ErrorEntry::from(&e)),
                    }
                }
            }
            code = row.errors.iter().map(|e| e.exit_code).fold(code, u8::max);
            row
        })
        .collect();
    Ok((rows, code))
}
