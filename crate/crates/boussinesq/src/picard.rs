//! The fixed-point map for the half-line problem and its Picard iteration.
//!
//! ```text
//! Phi(u) = eta W(f^e, g^e) - eta D[G(u)] + eta W_0(0, 0, h1 - p1 + q1, h2 - p2 + q2)
//! ```
//!
//! where `p` are the traces of the free flow and `q` those of the Duhamel term. The
//! Duhamel term is subtracted because the equation reads `u_tt - u_xx + u_xxxx = -G`.

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryKernel, BoundaryKernelConfig};
use crate::cutoff::eta;
use crate::duhamel::{duhamel_spectra, nonlinearity, traces_from_spectra, windowed_field};
use crate::error::{Error, Result};
use crate::halfline::{
    check_compatibility, extend, restrict, BoundarySignal, ExtensionMethod, HalfLineFunction,
};
use crate::linear_flow::{free_propagate_spectrum, trace_at_zero};
use crate::report::{DiagnosticsReport, IterationRecord};
use crate::spacetime::SpaceTimeField;
use crate::spectral::{forward_transform, sobolev_norm, Field, GridSpec, SobolevIndex};
use crate::xsb::xsb_norm;

/// Tolerance on the corner conditions `f(0) = h1(0)`, `f'(0) = h2(0)`.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct IBVPData {
    pub f: HalfLineFunction,
    /// Initial velocity potential: `u_t(x, 0) = g'(x)`.
    pub g: HalfLineFunction,
    pub h1: BoundarySignal,
    pub h2: BoundarySignal,
    pub s: SobolevIndex,
    pub extension: ExtensionMethod,
}

impl IBVPData {
    pub fn new(
        f: HalfLineFunction,
        g: HalfLineFunction,
        h1: BoundarySignal,
        h2: BoundarySignal,
        s: SobolevIndex,
        extension: ExtensionMethod,
    ) -> Result<Self> {
        if f.grid != g.grid {
            return Err(Error::InvalidParameter("f and g must share a grid".into()));
        }
        if h1.len() != f.grid.nt || h2.len() != f.grid.nt {
            return Err(Error::InvalidParameter("boundary data must be sampled on the grid times".into()));
        }
        let verdict = check_compatibility(&f, &h1, &h2, s.value(), COMPATIBILITY_TOL);
        if !verdict.pass {
            let value = verdict.value_gap.unwrap_or(0.0).max(verdict.slope_gap.unwrap_or(0.0));
            return Err(Error::CompatibilityViolation { value, s: s.value() });
        }
        Ok(IBVPData { f, g, h1, h2, s, extension })
    }

    /// All-zero data on `grid`.
    pub fn zeros(grid: GridSpec) -> Self {
        let s = SobolevIndex::new(0.0).unwrap();
        IBVPData {
            f: HalfLineFunction::zeros(grid, s),
            g: HalfLineFunction::zeros(grid, s),
            h1: BoundarySignal::zeros(&grid, 0.25),
            h2: BoundarySignal::zeros(&grid, -0.25),
            s,
            extension: ExtensionMethod::SmoothDecayReflection,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.f.grid
    }

    pub fn with_extension(&self, extension: ExtensionMethod) -> Self {
        IBVPData { extension, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Modulation exponent of the iteration norm.
    pub b: f64,
    /// First window scale tried; `None` uses half the grid's time span.
    pub t_init: Option<f64>,
    /// Largest tolerated empirical contraction factor.
    pub contraction_target: f64,
    pub max_iters: usize,
    pub fp_tol: f64,
    /// Smoothing exponent for diagnostics.
    pub a: Option<f64>,
    /// Drop the quadratic term (linear problem through the same pipeline).
    pub linear_only: bool,
    pub kernel: BoundaryKernelConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            b: 0.45,
            t_init: None,
            contraction_target: 0.5,
            max_iters: 40,
            fp_tol: 1e-9,
            a: None,
            linear_only: false,
            kernel: BoundaryKernelConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, s: f64) -> Result<()> {
        if !(self.b > 0.0 && self.b < 0.5) {
            return Err(Error::InvalidParameter(format!("b = {} must lie in (0, 1/2)", self.b)));
        }
        if !(self.contraction_target > 0.0 && self.contraction_target < 1.0) {
            return Err(Error::InvalidParameter("contraction target must lie in (0, 1)".into()));
        }
        if !(self.fp_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter("fp_tol and max_iters must be positive".into()));
        }
        if let Some(a) = self.a {
            let limit = smoothing_limit(s);
            if a >= limit {
                return Err(Error::RangeViolation { a, limit });
            }
        }
        Ok(())
    }
}

/// `omega(xi_max) dt / pi`. Above 1 the boundary traces of the highest modes alias in time,
/// and for rough data the smoothing residual then grows with `nx`.
pub fn temporal_resolution(grid: GridSpec) -> f64 {
    let xi_max = grid.nx as f64 / 2.0 * grid.dxi();
    crate::linear_flow::dispersion(xi_max) * grid.dt() / std::f64::consts::PI
}

/// `min(1/2, s + 1/2, 5/2 - s)`.
pub fn smoothing_limit(s: f64) -> f64 {
    0.5f64.min(s + 0.5).min(2.5 - s)
}

#[derive(Clone, Debug)]
pub struct SolutionBundle {
    /// Full-line representative.
    pub u: SpaceTimeField,
    /// `u` at `x >= 0`, time-major.
    pub u_restricted: Vec<Vec<f64>>,
    /// Solution of the linear problem with the same data.
    pub linear_part: SpaceTimeField,
    /// Window scale the iteration converged on; `u` solves the problem on `[0, window]`.
    pub window: f64,
    pub s: f64,
    pub diagnostics: DiagnosticsReport,
}

/// The `u`-independent parts of the map for one window.
#[derive(Clone, Debug)]
pub struct PhiCache {
    pub window: f64,
    /// `eta W(f^e, g^e)`.
    pub free: SpaceTimeField,
    /// `eta W_0(0, 0, h1 - p1, h2 - p2)`.
    pub boundary: SpaceTimeField,
    /// `d_x` at the origin of `free + boundary`, per grid time.
    pub slope: Vec<f64>,
}

/// Windowed boundary evolution together with its exact `x`-derivative at the origin.
fn windowed_boundary(
    h1: &BoundarySignal,
    h2: &BoundarySignal,
    grid: GridSpec,
    cfg: &BoundaryKernelConfig,
    window: f64,
) -> Result<(SpaceTimeField, Vec<f64>)> {
    if h1.is_zero() && h2.is_zero() {
        return Ok((SpaceTimeField::zeros(grid, window), vec![0.0; grid.nt]));
    }
    let kernel = BoundaryKernel::new(h1, h2, grid, cfg)?;
    let field = kernel.field().time_weighted(|t| eta(t / window));
    let (_, d) = kernel.origin_traces();
    let slope = d.iter().enumerate().map(|(n, v)| eta(grid.t(n) / window) * v.re).collect();
    Ok((field, slope))
}

impl PhiCache {
    pub fn new(data: &IBVPData, cfg: &SolverConfig, window: f64) -> Result<Self> {
        let grid = data.grid();
        let fe = extend(&data.f, data.extension)?;
        let ge = extend(&data.g, data.extension)?;
        let free = free_window(&fe, &ge, window);
        let p = trace_at_zero(&fe, &ge, grid.dt(), grid.nt, window);
        let (boundary, kernel_slope) =
            windowed_boundary(&data.h1.sub(&p.p1), &data.h2.sub(&p.p2), grid, &cfg.kernel, window)?;
        let slope = p.p2.samples.iter().zip(&kernel_slope).map(|(a, b)| a + b).collect();
        Ok(PhiCache { window, free, boundary, slope })
    }

    pub fn linear_part(&self) -> SpaceTimeField {
        self.free.add(&self.boundary)
    }
}

fn free_window(fe: &Field, ge: &Field, window: f64) -> SpaceTimeField {
    let grid = fe.grid;
    let (fh, gh) = (forward_transform(fe), forward_transform(ge));
    let mut hat = vec![crate::spectral::C64::new(0.0, 0.0); grid.nx * grid.nt];
    for n in 0..grid.nt {
        let spec = free_propagate_spectrum(&fh, &gh, grid.t(n));
        hat[n * grid.nx..(n + 1) * grid.nx].copy_from_slice(&spec.coeffs);
    }
    windowed_field(&hat, grid, window)
}

/// One application of the map, reusing the cached linear pieces.
pub fn phi_cached(u: &SpaceTimeField, cache: &PhiCache, cfg: &SolverConfig) -> Result<SpaceTimeField> {
    Ok(phi_with_slope(u, cache, cfg)?.0)
}

/// The map together with `d_x Phi(u)` at the origin, assembled from the exact
/// derivatives of each piece rather than from grid values.
pub fn phi_with_slope(u: &SpaceTimeField, cache: &PhiCache, cfg: &SolverConfig) -> Result<(SpaceTimeField, Vec<f64>)> {
    let mut out = cache.linear_part();
    if cfg.linear_only {
        return Ok((out, cache.slope.clone()));
    }
    let grid = u.grid;
    let window = cache.window;
    let forcing = nonlinearity(u, window);
    let hat = duhamel_spectra(&forcing);
    let duhamel = windowed_field(&hat, grid, window);
    let q = traces_from_spectra(&hat, &forcing, window);
    let (correction, kernel_slope) = windowed_boundary(&q.p1, &q.p2, grid, &cfg.kernel, window)?;
    for ((o, d), c) in out.values.iter_mut().zip(&duhamel.values).zip(&correction.values) {
        *o += c - d;
    }
    out.window = window;
    let slope = (0..grid.nt).map(|n| cache.slope[n] - q.p2.samples[n] + kernel_slope[n]).collect();
    Ok((out, slope))
}

pub fn phi_map(u: &SpaceTimeField, data: &IBVPData, cfg: &SolverConfig, window: f64) -> Result<SpaceTimeField> {
    phi_cached(u, &PhiCache::new(data, cfg, window)?, cfg)
}

/// Picard iteration from the windowed free flow, halving the window whenever the
/// contraction factor stays above target for three consecutive steps.
pub fn solve(data: &IBVPData, cfg: &SolverConfig) -> Result<SolutionBundle> {
    let grid = data.grid();
    let s = data.s.value();
    cfg.validate(s)?;
    let mut window = cfg.t_init.unwrap_or(0.5 * grid.t_max).min(0.5 * grid.t_max);
    let mut history = Vec::new();
    loop {
        if window < 4.0 * grid.dt() {
            return Err(Error::NoContraction { t: window });
        }
        let cache = PhiCache::new(data, cfg, window)?;
        let mut u = cache.free.clone();
        let mut slope = cache.slope.clone();
        let mut prev = f64::NAN;
        let mut strikes = 0;
        let mut converged = false;
        for iter in 1..=cfg.max_iters {
            let (next, next_slope) = phi_with_slope(&u, &cache, cfg)?;
            let diff = xsb_norm(&next.sub(&u), s, cfg.b);
            let contraction = diff / prev;
            history.push(IterationRecord { iter, window, diff_norm: diff, contraction });
            u = next;
            slope = next_slope;
            if diff < cfg.fp_tol {
                converged = true;
                break;
            }
            if !diff.is_finite() {
                break;
            }
            strikes = if contraction > cfg.contraction_target { strikes + 1 } else { 0 };
            if strikes >= 3 {
                break;
            }
            prev = diff;
        }
        if converged {
            let mut diagnostics = DiagnosticsReport { iterations: history, ..Default::default() };
            let residual = if cfg.linear_only {
                0.0
            } else {
                xsb_norm(&phi_cached(&u, &cache, cfg)?.sub(&u), s, cfg.b)
            };
            diagnostics.set("window", window);
            diagnostics.set("temporal_resolution", temporal_resolution(grid));
            diagnostics.set("iterations", diagnostics.iterations.len() as f64);
            diagnostics.set("fixed_point_residual", residual);
            diagnostics.verdict("fixed_point", residual < 10.0 * cfg.fp_tol);
            let (tv, td) = boundary_trace_errors(&u, data, 0.5 * window);
            diagnostics.set("trace_error_value", tv);
            diagnostics.set("trace_error_slope_grid", td);
            let exact_slope = slope
                .iter()
                .zip(&data.h2.samples)
                .enumerate()
                .filter(|(n, _)| grid.t(*n) <= 0.5 * window + 1e-12)
                .map(|(_, (a, b))| (a - b).abs())
                .fold(0.0, f64::max);
            diagnostics.set("trace_error_slope", exact_slope);
            let linear_part = cache.linear_part();
            return Ok(SolutionBundle {
                u_restricted: u.restrict_half(),
                u,
                linear_part,
                window,
                s,
                diagnostics,
            });
        }
        window *= 0.5;
    }
}

/// Sixth-order one-sided first derivative at the first of seven nodes. The field left of
/// the origin is extension-dependent and need not be smooth, so it is not used.
const ONE_SIDED_SLOPE: [f64; 7] = [-49.0 / 20.0, 6.0, -15.0 / 2.0, 20.0 / 3.0, -15.0 / 4.0, 6.0 / 5.0, -1.0 / 6.0];

/// `max |u(0, t) - h1|` and `max |u_x(0, t) - h2|` over `t <= t_end`, from grid values.
/// The slope is only as good as the grid resolves the boundary layers `e^{-x s}`.
pub fn boundary_trace_errors(u: &SpaceTimeField, data: &IBVPData, t_end: f64) -> (f64, f64) {
    let grid = u.grid;
    let o = grid.origin();
    let (mut ev, mut ed) = (0.0f64, 0.0f64);
    for n in 0..grid.nt {
        if grid.t(n) > t_end + 1e-12 {
            break;
        }
        let row = u.row(n);
        ev = ev.max((row[o].re - data.h1.samples[n]).abs());
        let slope: f64 = ONE_SIDED_SLOPE.iter().enumerate().map(|(i, c)| c * row[o + i].re).sum::<f64>() / grid.dx();
        ed = ed.max((slope - data.h2.samples[n]).abs());
    }
    (ev, ed)
}

/// `t -> ||u(t) - u_lin(t)||_{H^{s+a}}` on the solved window, measured on `x >= 0`
/// through the smooth-decay reflection of the restriction.
pub fn smoothing_residual(bundle: &SolutionBundle, a: f64) -> Result<Vec<(f64, f64)>> {
    let limit = smoothing_limit(bundle.s);
    if a >= limit {
        return Err(Error::RangeViolation { a, limit });
    }
    let grid = bundle.u.grid;
    let diff = bundle.u.sub(&bundle.linear_part);
    let mut out = Vec::new();
    for n in 0..grid.nt {
        let t = grid.t(n);
        if t > bundle.window + 1e-12 {
            break;
        }
        out.push((t, halfline_sobolev(&diff.slice(n), bundle.s + a)));
    }
    Ok(out)
}

/// `t -> ||u(t)||_{H^r}` on `x >= 0`, same convention as [`smoothing_residual`].
pub fn solution_norm_series(bundle: &SolutionBundle, r: f64) -> Vec<(f64, f64)> {
    let grid = bundle.u.grid;
    (0..grid.nt)
        .map(|n| (grid.t(n), n))
        .take_while(|(t, _)| *t <= bundle.window + 1e-12)
        .map(|(t, n)| (t, halfline_sobolev(&bundle.u.slice(n), r)))
        .collect()
}

fn halfline_sobolev(slice: &Field, r: f64) -> f64 {
    let half = restrict(slice);
    let ext = crate::halfline::extend_samples(&half.samples, ExtensionMethod::SmoothDecayReflection);
    let field = Field { grid: slice.grid, values: ext.into_iter().map(crate::spectral::C64::from).collect() };
    sobolev_norm(&field, r)
}
