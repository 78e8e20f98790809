//! Batch experiment runner behind the `boussinesq` binary.
//!
//! `boussinesq <command> <config.toml> [--output DIR] [--seed N]` reads one TOML file,
//! runs a pipeline and writes `<command>.csv` plus `<command>.manifest.toml` into the output
//! directory. The manifest is itself a valid config file for the same command.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::verify_linear_ibvp;
use crate::cutoff::bump;
use crate::error::Error;
use crate::fd_oracle::fd_solve_extrapolated;
use crate::halfline::{extend, rough_random, BoundarySignal, ExtensionMethod, HalfLineFunction};
use crate::linear_flow::kato_ratio;
use crate::picard::{smoothing_residual, solution_norm_series, solve, temporal_resolution, IBVPData, SolverConfig};
use crate::spectral::{GridSpec, SobolevIndex};
use crate::xsb::{bilinear_ratio, multiplier_supremum_case, random_windowed_field, SupremumCase};

/// Variable naming the default output directory.
pub const OUTPUT_ENV: &str = "BOUSSINESQ_OUTPUT_DIR";
const FALLBACK_OUTPUT: &str = "boussinesq-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    LinearVerify,
    Kato,
    Bilinear,
    SupremumSweep,
    Smoothing,
    ExtensionIndependence,
    OracleCompare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::LinearVerify => "linear-verify",
            Command::Kato => "kato",
            Command::Bilinear => "bilinear",
            Command::SupremumSweep => "supremum-sweep",
            Command::Smoothing => "smoothing",
            Command::ExtensionIndependence => "extension-independence",
            Command::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "boussinesq", version, about = "Half-line good Boussinesq experiments")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    config: PathBuf,
    /// Output directory; overrides the config and the environment.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Base seed for every random profile and sweep.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: f64,
    pub nx: usize,
    pub t_max: f64,
    pub nt: usize,
    pub pad_factor: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { half_width: 16.0, nx: 256, t_max: 1.0, nt: 129, pad_factor: 2 }
    }
}

impl GridConfig {
    pub fn spec(&self) -> crate::Result<GridSpec> {
        GridSpec::new(self.half_width, self.nx, self.t_max, self.nt, self.pad_factor)
    }
}

/// Built-in data profiles. Boundary signals accept all but `rough-random`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `amplitude exp(-((x - center) / width)^2)`.
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// Compact bump on `[center - half_width, center + half_width]`.
    Bump { amplitude: f64, center: f64, half_width: f64 },
    /// Random phases, spectral amplitude `amplitude <xi>^{-decay}`.
    RoughRandom { amplitude: f64, decay: f64, seed: u64 },
    /// Two-column `(x, value)` or `(t, value)` text file.
    File { path: PathBuf },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Zero
    }
}

impl Profile {
    fn eval(&self, y: f64) -> f64 {
        match *self {
            Profile::Gaussian { amplitude, center, width } => amplitude * (-((y - center) / width).powi(2)).exp(),
            Profile::Bump { amplitude, center, half_width } => bump(y, center, half_width, amplitude),
            _ => 0.0,
        }
    }

    fn reseed(&mut self, base: u64) {
        if let Profile::RoughRandom { seed, .. } = self {
            *seed = base;
        }
    }

    fn resolve(&mut self, dir: &Path) {
        if let Profile::File { path } = self {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }

    pub fn half_line(&self, grid: GridSpec, s: SobolevIndex) -> crate::Result<HalfLineFunction> {
        match self {
            Profile::Zero => Ok(HalfLineFunction::zeros(grid, s)),
            Profile::RoughRandom { amplitude, decay, seed } => {
                let f = rough_random(grid, *seed, *decay, *amplitude)?;
                HalfLineFunction::new(grid, f.samples, s)
            }
            Profile::File { path } => HalfLineFunction::from_file(grid, s, path),
            _ => Ok(HalfLineFunction::from_fn(grid, s, |x| self.eval(x))),
        }
    }

    pub fn signal(&self, grid: &GridSpec, s: f64) -> crate::Result<BoundarySignal> {
        match self {
            Profile::Zero => Ok(BoundarySignal::zeros(grid, s)),
            Profile::RoughRandom { .. } => {
                Err(Error::InvalidParameter("rough-random is not available for boundary signals".into()))
            }
            Profile::File { path } => BoundarySignal::from_file(grid, s, path),
            _ => Ok(BoundarySignal::from_fn(grid, s, |t| self.eval(t))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub s: f64,
    pub extension: ExtensionMethod,
    pub initial: Profile,
    pub velocity: Profile,
    pub boundary_value: Profile,
    pub boundary_slope: Profile,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            s: 0.0,
            extension: ExtensionMethod::SmoothDecayReflection,
            initial: Profile::Zero,
            velocity: Profile::Zero,
            boundary_value: Profile::Zero,
            boundary_slope: Profile::Zero,
        }
    }
}

impl DataConfig {
    pub fn build(&self, grid: GridSpec) -> crate::Result<IBVPData> {
        let s = SobolevIndex::new(self.s)?;
        let sv = SobolevIndex::new(self.s - 1.0)?;
        IBVPData::new(
            self.initial.half_line(grid, s)?,
            self.velocity.half_line(grid, sv)?,
            self.boundary_value.signal(&grid, (2.0 * self.s + 1.0) / 4.0)?,
            self.boundary_slope.signal(&grid, (2.0 * self.s - 1.0) / 4.0)?,
            s,
            self.extension,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KatoConfig {
    pub seeds: u64,
    pub first_seed: u64,
    pub decay: f64,
    pub amplitude: f64,
    pub s: f64,
    /// Half-length of the symmetric trace window.
    pub t_half: f64,
    pub nt: Vec<usize>,
}

impl Default for KatoConfig {
    fn default() -> Self {
        KatoConfig { seeds: 50, first_seed: 1, decay: 0.6, amplitude: 0.3, s: 0.0, t_half: 2.0, nt: vec![256, 512] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilinearConfig {
    pub seeds: u64,
    pub first_seed: u64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    /// Largest spatial frequency of the random waves.
    pub band: f64,
    pub tau_band: f64,
    pub t_max: f64,
    /// `(nx, nt)` pairs on the box `[-pi, pi)`.
    pub grids: Vec<(usize, usize)>,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        BilinearConfig {
            seeds: 50,
            first_seed: 1,
            s: 0.0,
            a: 0.4,
            b: 0.45,
            band: 8.0,
            tau_band: 40.0,
            t_max: 2.0,
            grids: vec![(32, 128), (64, 256)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupremumConfig {
    pub s_values: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub cutoffs: Vec<f64>,
    pub case: SupremumCase,
    /// Cutoff-doubling growth above which a row is flagged as diverging.
    pub growth_flag: f64,
}

impl Default for SupremumConfig {
    fn default() -> Self {
        SupremumConfig {
            s_values: vec![-0.4, -0.2, 0.0, 0.25],
            a: 0.0,
            b: 0.49,
            cutoffs: vec![20.0, 40.0, 80.0],
            case: SupremumCase::A,
            growth_flag: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingConfig {
    pub a: f64,
    pub seeds: u64,
    pub first_seed: u64,
    pub decay: f64,
    pub amplitude: f64,
    /// `(nx, nt)` ladder on the `[grid]` box; keep `omega(xi_max) dt < pi`.
    pub refinements: Vec<(usize, usize)>,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            a: 0.4,
            seeds: 1,
            first_seed: 1,
            decay: 0.6,
            amplitude: 0.3,
            refinements: vec![(64, 65), (128, 257), (256, 1025)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtensionConfig {
    pub methods: Vec<ExtensionMethod>,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        ExtensionConfig { methods: ExtensionMethod::ALL.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Coarse finite-difference spacing; must divide the spectral spacing.
    pub dx: f64,
    pub x_max: f64,
    pub damping_len: f64,
    /// Right end of the comparison interval; defaults to a quarter of the box.
    pub x_end: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { dx: 0.03125, x_max: 24.0, damping_len: 3.0, x_end: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub output: Option<PathBuf>,
    pub grid: GridConfig,
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub kato: KatoConfig,
    pub bilinear: BilinearConfig,
    pub supremum: SupremumConfig,
    pub smoothing: SmoothingConfig,
    pub extension: ExtensionConfig,
    pub oracle: OracleConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Check everything a run will need before any output is written.
    pub fn validate(&self, command: Command) -> crate::Result<()> {
        let grid = self.grid.spec()?;
        match command {
            Command::Solve | Command::ExtensionIndependence | Command::OracleCompare => {
                self.data.build(grid)?;
                self.solver.validate(self.data.s)?;
            }
            Command::LinearVerify => {
                self.data.build(grid)?;
            }
            Command::Kato => {
                if self.kato.nt.is_empty() {
                    return Err(Error::InvalidParameter("kato.nt is empty".into()));
                }
            }
            Command::Bilinear => {
                for &(nx, nt) in &self.bilinear.grids {
                    GridSpec::new(std::f64::consts::PI, nx, self.bilinear.t_max, nt, 2)?;
                }
            }
            Command::SupremumSweep => {
                if self.supremum.cutoffs.iter().any(|&k| k < 10.0) {
                    return Err(Error::InvalidParameter("supremum cutoffs must be at least 10".into()));
                }
            }
            Command::Smoothing => {
                for &(nx, nt) in &self.smoothing.refinements {
                    GridSpec::new(self.grid.half_width, nx, self.grid.t_max, nt, self.grid.pad_factor)?;
                }
                self.solver.validate(0.0)?;
                let limit = crate::picard::smoothing_limit(0.0);
                if self.smoothing.a >= limit {
                    return Err(Error::RangeViolation { a: self.smoothing.a, limit });
                }
            }
        }
        Ok(())
    }

    fn reseed(&mut self, base: u64) {
        for p in [&mut self.data.initial, &mut self.data.velocity] {
            p.reseed(base);
        }
        self.kato.first_seed = base;
        self.bilinear.first_seed = base;
        self.smoothing.first_seed = base;
    }

    fn resolve_paths(&mut self, dir: &Path) {
        for p in [
            &mut self.data.initial,
            &mut self.data.velocity,
            &mut self.data.boundary_value,
            &mut self.data.boundary_slope,
        ] {
            p.resolve(dir);
        }
    }
}

/// Output of one pipeline: CSV header and rows, plus summary lines for the manifest.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), ..Default::default() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Shortest round-trip formatting; NaN becomes an empty field.
fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:e}")
    }
}

fn half_line_diff(a: &[Vec<f64>], b: &[Vec<f64>], steps: usize) -> f64 {
    a.iter()
        .zip(b)
        .take(steps)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

pub fn run_pipeline(command: Command, cfg: &ExperimentConfig) -> crate::Result<Table> {
    let grid = cfg.grid.spec()?;
    match command {
        Command::Solve => {
            let data = cfg.data.build(grid)?;
            let bundle = solve(&data, &cfg.solver)?;
            let mut t = Table::new(&["iter", "diff_norm", "contraction_factor", "T"]);
            for r in &bundle.diagnostics.iterations {
                t.push(vec![r.iter.to_string(), num(r.diff_norm), num(r.contraction), num(r.window)]);
            }
            for (k, v) in &bundle.diagnostics.values {
                t.note(k, num(*v));
            }
            for (k, v) in &bundle.diagnostics.verdicts {
                t.note(&format!("pass_{k}"), v);
            }
            Ok(t)
        }
        Command::LinearVerify => {
            let data = cfg.data.build(grid)?;
            let report = verify_linear_ibvp(&data.h1, &data.h2, grid, &cfg.solver.kernel)?;
            let mut t = Table::new(&["quantity", "value"]);
            for (k, v) in &report.values {
                t.push(vec![k.clone(), num(*v)]);
            }
            for (k, v) in &report.verdicts {
                t.note(&format!("pass_{k}"), v);
            }
            Ok(t)
        }
        Command::Kato => {
            let k = &cfg.kato;
            let seeds: Vec<u64> = (k.first_seed..k.first_seed + k.seeds).collect();
            let rows: Vec<crate::Result<Vec<Vec<String>>>> = seeds
                .par_iter()
                .map(|&seed| {
                    let f = extend(&rough_random(grid, seed, k.decay, k.amplitude)?, ExtensionMethod::SmoothDecayReflection)?;
                    let g = extend(
                        &rough_random(grid, seed.wrapping_add(1 << 32), k.decay + 1.0, k.amplitude)?,
                        ExtensionMethod::SmoothDecayReflection,
                    )?;
                    k.nt.iter()
                        .map(|&nt| Ok(vec![seed.to_string(), nt.to_string(), num(kato_ratio(&f, &g, k.s, k.t_half, nt)?)]))
                        .collect()
                })
                .collect();
            let mut t = Table::new(&["seed", "nt", "ratio"]);
            for r in rows {
                for row in r? {
                    t.push(row);
                }
            }
            Ok(t)
        }
        Command::Bilinear => {
            let bc = &cfg.bilinear;
            let seeds: Vec<u64> = (bc.first_seed..bc.first_seed + bc.seeds).collect();
            let mut t = Table::new(&["seed", "nx", "nt", "ratio"]);
            for &(nx, nt) in &bc.grids {
                let g = GridSpec::new(std::f64::consts::PI, nx, bc.t_max, nt, 2)?;
                for &seed in &seeds {
                    let u = random_windowed_field(g, 2 * seed, bc.band, bc.tau_band);
                    let v = random_windowed_field(g, 2 * seed + 1, bc.band, bc.tau_band);
                    let r = bilinear_ratio(&u, &v, bc.s, bc.a, bc.b)?;
                    t.push(vec![seed.to_string(), nx.to_string(), nt.to_string(), num(r)]);
                }
            }
            Ok(t)
        }
        Command::SupremumSweep => {
            let sc = &cfg.supremum;
            let case = match sc.case {
                SupremumCase::A => "a",
                SupremumCase::BC => "bc",
            };
            let mut t = Table::new(&[
                "s", "a", "b", "case", "cutoff", "supremum", "growth", "argmax_xi", "argmax_tau", "diverging",
            ]);
            for &s in &sc.s_values {
                let mut prev: Option<f64> = None;
                for &k in &sc.cutoffs {
                    let r = multiplier_supremum_case(sc.case, s, sc.a, sc.b, k)?;
                    let growth = prev.map_or(f64::NAN, |p| r.value / p - 1.0);
                    t.push(vec![
                        num(s),
                        num(sc.a),
                        num(sc.b),
                        case.into(),
                        num(k),
                        num(r.value),
                        num(growth),
                        num(r.argmax.0),
                        num(r.argmax.1),
                        (growth > sc.growth_flag).to_string(),
                    ]);
                    prev = Some(r.value);
                }
            }
            Ok(t)
        }
        Command::Smoothing => {
            let sm = &cfg.smoothing;
            let mut t = Table::new(&["seed", "nx", "nt", "t", "residual_norm", "full_norm"]);
            for seed in sm.first_seed..sm.first_seed + sm.seeds {
                for &(nx, nt) in &sm.refinements {
                    let g = GridSpec::new(cfg.grid.half_width, nx, cfg.grid.t_max, nt, cfg.grid.pad_factor)?;
                    let s = SobolevIndex::new(0.0)?;
                    let f = rough_random(g, seed, sm.decay, sm.amplitude)?;
                    let data = IBVPData::new(
                        f,
                        HalfLineFunction::zeros(g, SobolevIndex::new(-1.0)?),
                        BoundarySignal::zeros(&g, 0.25),
                        BoundarySignal::zeros(&g, -0.25),
                        s,
                        ExtensionMethod::SmoothDecayReflection,
                    )?;
                    let bundle = solve(&data, &cfg.solver)?;
                    let res = smoothing_residual(&bundle, sm.a)?;
                    let full = solution_norm_series(&bundle, sm.a);
                    for ((time, r), (_, u)) in res.iter().zip(&full) {
                        t.push(vec![seed.to_string(), nx.to_string(), nt.to_string(), num(*time), num(*r), num(*u)]);
                    }
                    t.note(&format!("temporal_resolution_nx{nx}"), num(temporal_resolution(g)));
                }
            }
            Ok(t)
        }
        Command::ExtensionIndependence => {
            let base = cfg.data.build(grid)?;
            let mut t = Table::new(&["method", "window", "iterations", "max_diff"]);
            let mut first: Option<(Vec<Vec<f64>>, f64)> = None;
            for &m in &cfg.extension.methods {
                let b = solve(&base.with_extension(m), &cfg.solver)?;
                let diff = match &first {
                    None => 0.0,
                    Some((u0, w0)) => {
                        let steps = (0..grid.nt).take_while(|&n| grid.t(n) <= w0.min(b.window) + 1e-12).count();
                        half_line_diff(u0, &b.u_restricted, steps)
                    }
                };
                let name = extension_name(m);
                t.push(vec![name, num(b.window), b.diagnostics.iterations.len().to_string(), num(diff)]);
                if first.is_none() {
                    first = Some((b.u_restricted.clone(), b.window));
                }
            }
            Ok(t)
        }
        Command::OracleCompare => {
            let data = cfg.data.build(grid)?;
            let bundle = solve(&data, &cfg.solver)?;
            let oc = &cfg.oracle;
            let fd = fd_solve_extrapolated(&data, oc.x_max, oc.dx, oc.damping_len, bundle.window, grid.dt())?;
            let x_end = oc.x_end.unwrap_or(0.25 * grid.half_width);
            let nodes = (x_end / grid.dx()).floor() as usize;
            let mut t = Table::new(&["t", "max_abs_diff"]);
            let mut worst = 0.0f64;
            for (n, row) in bundle.u_restricted.iter().enumerate() {
                if grid.t(n) > bundle.window + 1e-12 || n >= fd.values.len() {
                    break;
                }
                let d = (0..=nodes.min(row.len() - 1))
                    .map(|j| (row[j] - fd.at(n, j as f64 * grid.dx())).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
                t.push(vec![num(grid.t(n)), num(d)]);
            }
            t.note("window", num(bundle.window));
            t.note("max_abs_diff", num(worst));
            Ok(t)
        }
    }
}

fn extension_name(m: ExtensionMethod) -> String {
    match m {
        ExtensionMethod::Zero => "zero",
        ExtensionMethod::EvenReflection => "even-reflection",
        ExtensionMethod::SmoothDecayReflection => "smooth-decay-reflection",
    }
    .into()
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoContraction { .. }
        | Error::QuadratureNotConverged { .. }
        | Error::ContourQuadratureNotConverged { .. }
        | Error::StabilityViolation { .. }
        | Error::NonFiniteMultiplier { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn manifest(command: Command, argv: &[String], cfg: &ExperimentConfig, table: &Table) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "# boussinesq {} {}", env!("CARGO_PKG_VERSION"), command.name());
    let _ = writeln!(m, "# argv: {}", argv.join(" "));
    let _ = writeln!(m, "# rows: {}", table.rows.len());
    for (k, v) in &table.summary {
        let _ = writeln!(m, "# {k} = {v}");
    }
    m.push('\n');
    m.push_str(&toml::to_string(cfg).expect("config serialises"));
    m
}

/// Parse `argv`, run, write outputs; returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let args = match Args::try_parse_from(&argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error in {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = args.seed {
        cfg.reseed(seed);
    }
    cfg.resolve_paths(args.config.parent().unwrap_or(Path::new(".")));
    if let Err(e) = cfg.validate(args.command) {
        eprintln!("config error: {e}");
        return EXIT_CONFIG;
    }
    let out_dir = args
        .output
        .clone()
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT));
    let table = match run_pipeline(args.command, &cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{} failed: {e}", args.command.name());
            return exit_code(&e);
        }
    };
    let name = args.command.name();
    let written = fs::create_dir_all(&out_dir)
        .and_then(|_| fs::write(out_dir.join(format!("{name}.csv")), table.to_csv()))
        .and_then(|_| fs::write(out_dir.join(format!("{name}.manifest.toml")), manifest(args.command, &argv, &cfg, &table)));
    if let Err(e) = written {
        eprintln!("cannot write to {}: {e}", out_dir.display());
        return EXIT_IO;
    }
    EXIT_OK
}
