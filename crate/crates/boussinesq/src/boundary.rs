//! Zero-initial-data boundary evolution `v = W_0(0, 0, h1, h2)`.
//!
//! The four integrals over `w` are written in the curve variable
//! `z = w sqrt(w^2 + 1)` (so `e^{itz}` oscillates uniformly and
//! `dw = s / (1 + 2w^2) dz` with `s = sqrt(w^2 + 1)`):
//!
//! ```text
//! 2 pi v = ∫ e^{itz} [ -(iw(iw+s) h1^ + (iw+s) h2^) e^{-xs} rho(xs)
//!                     + ((iw+s) s h1^ + (iw+s) h2^) e^{-ixw} ] dz / (1 + 2w^2)
//! ```
//!
//! with `h^(z) = ∫ e^{-izt} chi h dt`. Each node factorises in `x` and `t`,
//! so a field is one complex matrix product.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::rho;
use crate::error::{Error, Result};
use crate::halfline::BoundarySignal;
use crate::quad::{composite_gauss, graded_edges, gregory_weights, refine_edges};
use crate::report::DiagnosticsReport;
use crate::spacetime::SpaceTimeField;
use crate::spectral::{fft_in_place, GridSpec, C64, I};

/// How the oscillatory `e^{-ixw}` terms are evaluated on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscillatoryPath {
    /// Same Gauss–Legendre nodes as the decaying terms.
    Quadrature,
    /// As free flows of the curve-sampled data on the grid's own frequencies.
    MultiplierFlow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryKernelConfig {
    /// Truncation `|w| <= omega_cutoff`; `None` picks it from the decay of `h^`.
    pub omega_cutoff: Option<f64>,
    /// Minimum number of nodes (at least 256 are always used).
    pub n_quad: usize,
    /// Relative size of `|h^|` treated as negligible when picking the cutoff.
    pub tail_tol: f64,
    pub panel_order: usize,
    pub oscillatory: OscillatoryPath,
    /// Re-evaluate probe points with every panel split and compare.
    pub check_convergence: bool,
    pub convergence_tol: f64,
}

impl Default for BoundaryKernelConfig {
    fn default() -> Self {
        BoundaryKernelConfig {
            omega_cutoff: None,
            n_quad: 256,
            tail_tol: 1e-10,
            panel_order: 16,
            oscillatory: OscillatoryPath::Quadrature,
            check_convergence: true,
            convergence_tol: 1e-6,
        }
    }
}

/// `w` on the curve `z = w sqrt(w^2 + 1)`, odd in `z`.
#[inline]
pub fn omega_of_z(z: f64) -> f64 {
    let w2 = 0.5 * ((1.0 + 4.0 * z * z).sqrt() - 1.0);
    w2.sqrt().copysign(z)
}

#[inline]
pub fn z_of_omega(w: f64) -> f64 {
    w * (w * w + 1.0).sqrt()
}

/// Fourier transform of `chi h` at a real frequency `z`.
pub fn hat_z(h: &BoundarySignal, z: f64) -> C64 {
    let w = gregory_weights(h.len(), h.dt);
    hat_with_weights(h, &w, z)
}

fn hat_with_weights(h: &BoundarySignal, w: &[f64], z: f64) -> C64 {
    let step = C64::from_polar(1.0, -z * h.dt);
    let mut phase = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for (n, (hv, wv)) in h.samples.iter().zip(w).enumerate() {
        if n % 64 == 0 {
            phase = C64::from_polar(1.0, -z * h.dt * n as f64);
        }
        if *hv != 0.0 {
            acc += phase * (hv * wv);
        }
        phase *= step;
    }
    acc
}

/// `h^` evaluated at `z = w sqrt(w^2 + 1)`.
pub fn hat_on_curve(h: &BoundarySignal, omega: f64) -> C64 {
    hat_z(h, z_of_omega(omega))
}

/// Cutoff `Z` in `z` beyond which both transforms stay below `tol` of their peak.
/// Never exceeds the time-sampling limit `pi / dt`.
pub fn adaptive_z_cutoff(h1: &BoundarySignal, h2: &BoundarySignal, tol: f64) -> f64 {
    let zlim = 0.95 * PI / h1.dt.max(h2.dt);
    let step = 0.25;
    let w1 = gregory_weights(h1.len(), h1.dt);
    let w2 = gregory_weights(h2.len(), h2.dt);
    let count = (zlim / step) as usize + 1;
    let env: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|k| {
            let z = k as f64 * step;
            let a = if h1.is_zero() { 0.0 } else { hat_with_weights(h1, &w1, z).norm() };
            let b = if h2.is_zero() { 0.0 } else { hat_with_weights(h2, &w2, z).norm() };
            a.max(b)
        })
        .collect();
    let peak = env.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 1.0;
    }
    let mut last = 0;
    for (k, v) in env.iter().enumerate() {
        if *v >= tol * peak {
            last = k;
        }
    }
    ((last as f64 + 8.0) * step).min(zlim)
}

/// Quadrature data in the curve variable, with both transforms sampled at the nodes.
#[derive(Clone, Debug)]
pub struct CurveQuadrature {
    pub z: Vec<f64>,
    pub weight: Vec<f64>,
    pub omega: Vec<f64>,
    pub s: Vec<f64>,
    /// Coefficient of `e^{-xs} rho(xs) e^{itz}` (already divided by `2 pi`).
    pub decaying: Vec<C64>,
    /// Coefficient of `e^{-ixw} e^{itz}` (already divided by `2 pi`).
    pub oscillating: Vec<C64>,
}

impl CurveQuadrature {
    pub fn build(h1: &BoundarySignal, h2: &BoundarySignal, edges: &[f64], order: usize) -> Self {
        let (z, weight) = composite_gauss(edges, order);
        let w1 = gregory_weights(h1.len(), h1.dt);
        let w2 = gregory_weights(h2.len(), h2.dt);
        let hats: Vec<(C64, C64)> = z
            .par_iter()
            .map(|&zq| {
                let a = if h1.is_zero() { C64::new(0.0, 0.0) } else { hat_with_weights(h1, &w1, zq) };
                let b = if h2.is_zero() { C64::new(0.0, 0.0) } else { hat_with_weights(h2, &w2, zq) };
                (a, b)
            })
            .collect();
        let n = z.len();
        let mut q = CurveQuadrature {
            z: z.clone(),
            weight: weight.clone(),
            omega: vec![0.0; n],
            s: vec![0.0; n],
            decaying: vec![C64::new(0.0, 0.0); n],
            oscillating: vec![C64::new(0.0, 0.0); n],
        };
        for i in 0..n {
            let w = omega_of_z(z[i]);
            let s = (1.0 + w * w).sqrt();
            let jac = weight[i] / ((1.0 + 2.0 * w * w) * 2.0 * PI);
            let (a, b) = hats[i];
            let lift = I * w + s;
            q.omega[i] = w;
            q.s[i] = s;
            q.decaying[i] = -(I * w * lift * a + lift * b) * jac;
            q.oscillating[i] = (lift * s * a + lift * b) * jac;
        }
        q
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// `d^p_x d^m_t v` at scattered `(x, t)`; derivatives in `x` need `x >= 0` (where `rho = 1`).
    pub fn evaluate_point(&self, x: f64, t: f64, dx_order: u32, dt_order: u32, oscillating: bool) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for q in 0..self.len() {
            let tfac = C64::from_polar(1.0, t * self.z[q]) * (I * self.z[q]).powu(dt_order);
            let mut xfac = C64::new(0.0, 0.0);
            let y = x * self.s[q];
            if y > -1.0 {
                xfac += self.decaying[q] * (-y).exp() * rho(y) * (-self.s[q]).powi(dx_order as i32);
            }
            if oscillating {
                xfac += self.oscillating[q] * C64::from_polar(1.0, -x * self.omega[q]) * (-I * self.omega[q]).powu(dx_order);
            }
            acc += tfac * xfac;
        }
        acc
    }

    /// `d^p_x v` on the tensor product `ts x xs` (time-major).
    pub fn evaluate_grid(&self, xs: &[f64], ts: &[f64], dx_order: u32, oscillating: bool) -> Vec<C64> {
        let nq = self.len();
        let (nt, nx) = (ts.len(), xs.len());
        let mut time = vec![C64::new(0.0, 0.0); nt * nq];
        time.par_chunks_mut(nq).zip(ts.par_iter()).for_each(|(row, &t)| {
            for q in 0..nq {
                row[q] = C64::from_polar(1.0, t * self.z[q]);
            }
        });
        let mut space = vec![C64::new(0.0, 0.0); nq * nx];
        space.par_chunks_mut(nx).enumerate().for_each(|(q, row)| {
            let (s, w) = (self.s[q], self.omega[q]);
            let dfac = self.decaying[q] * (-s).powi(dx_order as i32);
            let ofac = self.oscillating[q] * (-I * w).powu(dx_order);
            for (j, &x) in xs.iter().enumerate() {
                let y = x * s;
                let mut v = C64::new(0.0, 0.0);
                if y > -1.0 && y < 745.0 {
                    v += dfac * ((-y).exp() * rho(y));
                }
                if oscillating {
                    v += ofac * C64::from_polar(1.0, -x * w);
                }
                row[j] = v;
            }
        });
        complex_matmul(&time, &space, nt, nq, nx)
    }
}

/// Row-major `(m x k) (k x n)`.
fn complex_matmul(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); m * n];
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex64 is #[repr(C)] {re, im}, layout-identical to [f64; 2];
    // the slices have the stated row-major shapes.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}

/// Reusable evaluator of `W_0(0, 0, h1, h2)` for one pair of boundary signals.
#[derive(Clone, Debug)]
pub struct BoundaryKernel {
    pub grid: GridSpec,
    pub cfg: BoundaryKernelConfig,
    pub z_cutoff: f64,
    pub edges: Vec<f64>,
    pub quad: CurveQuadrature,
    h1: BoundarySignal,
    h2: BoundarySignal,
}

impl BoundaryKernel {
    pub fn new(h1: &BoundarySignal, h2: &BoundarySignal, grid: GridSpec, cfg: &BoundaryKernelConfig) -> Result<Self> {
        if h1.len() != h2.len() || (h1.dt - h2.dt).abs() > 1e-14 * h1.dt {
            return Err(Error::InvalidParameter("h1 and h2 must share a time grid".into()));
        }
        let z_cutoff = match cfg.omega_cutoff {
            Some(w) => z_of_omega(w),
            None => adaptive_z_cutoff(h1, h2, cfg.tail_tol),
        };
        let t_span = h1.t_max().max(grid.t_max);
        let x_span = grid.half_width;
        let width = |z: f64| {
            let w = omega_of_z(z);
            let jac = (1.0 + w * w).sqrt() / (1.0 + 2.0 * w * w);
            let rate = t_span + x_span * jac;
            (2.0 * PI / rate).min(0.5 + 0.25 * z)
        };
        let mut edges = graded_edges(z_cutoff, width);
        let min_nodes = cfg.n_quad.max(256);
        while (edges.len() - 1) * cfg.panel_order < min_nodes {
            edges = refine_edges(&edges);
        }
        let quad = CurveQuadrature::build(h1, h2, &edges, cfg.panel_order);
        let kernel = BoundaryKernel { grid, cfg: cfg.clone(), z_cutoff, edges, quad, h1: h1.clone(), h2: h2.clone() };
        if cfg.check_convergence {
            kernel.convergence_check()?;
        }
        Ok(kernel)
    }

    /// Relative change of probe values when every panel is split in two.
    pub fn convergence_check(&self) -> Result<f64> {
        let fine = CurveQuadrature::build(&self.h1, &self.h2, &refine_edges(&self.edges), self.cfg.panel_order);
        let g = self.grid;
        let ts: Vec<f64> = (0..g.nt).step_by((g.nt / 24).max(1)).map(|n| g.t(n)).collect();
        let xs: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0, 0.25 * g.half_width, 0.5 * g.half_width, -0.5, -0.05]
            .iter()
            .cloned()
            .filter(|x| x.abs() < g.half_width)
            .collect();
        let a = self.quad.evaluate_grid(&xs, &ts, 0, true);
        let b = fine.evaluate_grid(&xs, &ts, 0, true);
        let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        let change = if scale > 0.0 { diff / scale } else { 0.0 };
        if change > self.cfg.convergence_tol {
            return Err(Error::QuadratureNotConverged { change });
        }
        Ok(change)
    }

    pub fn node_count(&self) -> usize {
        self.quad.len()
    }

    /// Full field on the grid.
    pub fn field(&self) -> SpaceTimeField {
        self.field_with(self.cfg.oscillatory)
    }

    pub fn field_with(&self, path: OscillatoryPath) -> SpaceTimeField {
        let g = self.grid;
        let xs = g.xs();
        let ts = g.times();
        let oscillating = path == OscillatoryPath::Quadrature;
        let values = self.quad.evaluate_grid(&xs, &ts, 0, oscillating);
        let mut out = SpaceTimeField { grid: g, values, window: g.t_max };
        if path == OscillatoryPath::MultiplierFlow {
            let flow = self.oscillating_flow();
            for (v, w) in out.values.iter_mut().zip(&flow.values) {
                *v += w;
            }
        }
        out
    }

    /// Only the decaying (`e^{-xs}`) part.
    pub fn decaying_field(&self) -> SpaceTimeField {
        let g = self.grid;
        let values = self.quad.evaluate_grid(&g.xs(), &g.times(), 0, false);
        SpaceTimeField { grid: g, values, window: g.t_max }
    }

    /// Only the oscillating part, by quadrature.
    pub fn oscillating_quadrature(&self) -> SpaceTimeField {
        let full = self.field_with(OscillatoryPath::Quadrature);
        full.sub(&self.decaying_field())
    }

    /// Oscillating part as free flows: substituting `w = -xi` gives
    /// `(dxi / 2pi) Σ_k e^{i xi_k x} e^{-it z(xi_k)} (s - i xi_k)(h1^(-z) + h2^(-z)/s)`.
/// The result is periodic in `x`, so it matches the quadrature only while the
/// outgoing waves have not wrapped around the box.
    pub fn oscillating_flow(&self) -> SpaceTimeField {
        let g = self.grid;
        let wts1 = gregory_weights(self.h1.len(), self.h1.dt);
        let wts2 = gregory_weights(self.h2.len(), self.h2.dt);
        let base: Vec<C64> = (0..g.nx)
            .into_par_iter()
            .map(|k| {
                if k == g.nx / 2 {
                    return C64::new(0.0, 0.0);
                }
                let xi = g.xi(k);
                let z = z_of_omega(xi);
                if z.abs() > self.z_cutoff {
                    return C64::new(0.0, 0.0);
                }
                let s = (1.0 + xi * xi).sqrt();
                let a = if self.h1.is_zero() { C64::new(0.0, 0.0) } else { hat_with_weights(&self.h1, &wts1, -z) };
                let b = if self.h2.is_zero() { C64::new(0.0, 0.0) } else { hat_with_weights(&self.h2, &wts2, -z) };
                (s - I * xi) * (a + b / s)
            })
            .collect();
        let zs: Vec<f64> = (0..g.nx).map(|k| z_of_omega(g.xi(k))).collect();
        let scale = g.dxi() / (2.0 * PI);
        let mut out = SpaceTimeField::zeros(g, g.t_max);
        out.values.par_chunks_mut(g.nx).enumerate().for_each(|(n, row)| {
            let t = g.t(n);
            for k in 0..g.nx {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                row[k] = base[k] * C64::from_polar(scale * sign, -t * zs[k]);
            }
            fft_in_place(row, true);
        });
        out
    }

    /// `v(0, t)` and `v_x(0, t)` on the grid times (exact node evaluation).
    pub fn origin_traces(&self) -> (Vec<C64>, Vec<C64>) {
        let ts = self.grid.times();
        let v = self.quad.evaluate_grid(&[0.0], &ts, 0, true);
        let d = self.quad.evaluate_grid(&[0.0], &ts, 1, true);
        (v, d)
    }
}

/// Grid evaluation of `W_0(0, 0, h1, h2)`.
pub fn boundary_evolution(
    h1: &BoundarySignal,
    h2: &BoundarySignal,
    grid: GridSpec,
    cfg: &BoundaryKernelConfig,
) -> Result<SpaceTimeField> {
    if h1.is_zero() && h2.is_zero() {
        return Ok(SpaceTimeField::zeros(grid, grid.t_max));
    }
    Ok(BoundaryKernel::new(h1, h2, grid, cfg)?.field())
}

/// Decaying characteristic roots of `lambda^2 - w^2 + w^4 = 0`, with the branch bookkeeping
/// of the Laplace-transform construction.
pub struct MellinKernel;

impl MellinKernel {
    /// `sqrt(1/4 - lambda^2)`, analytic off `[-1/2, 1/2]`.
    pub fn inner_root(lambda: C64) -> C64 {
        let th1 = (lambda + 0.5).arg();
        let th2 = (lambda - 0.5).arg();
        let m = (0.25 - lambda * lambda).norm().sqrt();
        C64::from_polar(m, 0.5 * (th1 + th2 + PI))
    }

    pub fn root_a(lambda: C64) -> C64 {
        -sqrt_cut_below(0.5 + Self::inner_root(lambda))
    }

    pub fn root_b(lambda: C64) -> C64 {
        -sqrt_cut_above(0.5 - Self::inner_root(lambda))
    }
}

/// Square root with the branch cut along the negative imaginary axis.
fn sqrt_cut_below(w: C64) -> C64 {
    let mut phi = w.arg();
    if phi <= -0.5 * PI {
        phi += 2.0 * PI;
    }
    C64::from_polar(w.norm().sqrt(), 0.5 * phi)
}

/// Square root with the branch cut along the positive imaginary axis.
fn sqrt_cut_above(w: C64) -> C64 {
    let mut phi = w.arg();
    if phi > 0.5 * PI {
        phi -= 2.0 * PI;
    }
    C64::from_polar(w.norm().sqrt(), 0.5 * phi)
}

/// Laplace transform `∫_0^∞ e^{-lambda t} h dt` at `lambda = iz`.
fn laplace_on_axis(h: &BoundarySignal, w: &[f64], z: f64) -> C64 {
    hat_with_weights(h, w, z)
}

fn oracle_integral(h1: &BoundarySignal, h2: &BoundarySignal, x: f64, t: f64, edges: &[f64]) -> f64 {
    let (zs, ws) = composite_gauss(edges, 16);
    let w1 = gregory_weights(h1.len(), h1.dt);
    let w2 = gregory_weights(h2.len(), h2.dt);
    let acc: C64 = zs
        .par_iter()
        .zip(ws.par_iter())
        .map(|(&z, &w)| {
            let lambda = I * z;
            let a = MellinKernel::root_a(lambda);
            let b = MellinKernel::root_b(lambda);
            let t1 = laplace_on_axis(h1, &w1, z);
            let t2 = laplace_on_axis(h2, &w2, z);
            let u = ((a * t1 - t2) * (b * x).exp() - (b * t1 - t2) * (a * x).exp()) / (a - b);
            (lambda * t).exp() * u * w
        })
        .collect::<Vec<C64>>()
        .iter()
        .sum();
    acc.re / (2.0 * PI)
}

/// `v(x, t)` from the inverted Laplace transform on the imaginary axis.
pub fn mellin_oracle(h1: &BoundarySignal, h2: &BoundarySignal, x: f64, t: f64) -> Result<f64> {
    if h1.is_zero() && h2.is_zero() {
        return Ok(0.0);
    }
    let zmax = adaptive_z_cutoff(h1, h2, 1e-12);
    let rate = t.abs() + h1.t_max() + x.abs();
    let edges = graded_edges(zmax, |z| (2.0 * PI / rate).min(0.25 + 0.25 * z));
    let coarse = oracle_integral(h1, h2, x, t, &edges);
    let fine = oracle_integral(h1, h2, x, t, &refine_edges(&edges));
    let scale = h1.samples.iter().chain(&h2.samples).fold(0.0f64, |m, v| m.max(v.abs()));
    let change = (coarse - fine).abs() / scale.max(f64::MIN_POSITIVE);
    if change > 1e-8 {
        return Err(Error::ContourQuadratureNotConverged { change });
    }
    Ok(fine)
}

/// Residual, trace and initial-data diagnostics of the boundary evolution on `x >= 0`.
///
/// Time derivatives are second-order differences on the grid; space derivatives are exact
/// in the kernel's own frequency variable.
pub fn verify_linear_ibvp(
    h1: &BoundarySignal,
    h2: &BoundarySignal,
    grid: GridSpec,
    cfg: &BoundaryKernelConfig,
) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::default();
    if h1.is_zero() && h2.is_zero() {
        for key in ["pde_residual", "trace_error_value", "trace_error_slope", "initial_value", "initial_velocity"] {
            report.set(key, 0.0);
        }
        return Ok(report);
    }
    let kernel = BoundaryKernel::new(h1, h2, grid, cfg)?;
    let q = &kernel.quad;
    let dx = grid.dx();
    let xs: Vec<f64> = (1..).map(|i| i as f64 * dx).take_while(|x| *x <= 0.5 * grid.half_width).collect();
    let last = ((0.5 * grid.t_max / grid.dt()).floor() as usize).min(grid.nt - 2);
    let ts: Vec<f64> = (0..=last + 1).map(|n| grid.t(n)).collect();
    let v = q.evaluate_grid(&xs, &ts, 0, true);
    let v2 = q.evaluate_grid(&xs, &ts, 2, true);
    let v4 = q.evaluate_grid(&xs, &ts, 4, true);
    let nx = xs.len();
    let dt = grid.dt();
    let mut residual = 0.0f64;
    for n in 1..=last {
        for j in 0..nx {
            let vtt = (v[(n + 1) * nx + j] - 2.0 * v[n * nx + j] + v[(n - 1) * nx + j]) / (dt * dt);
            residual = residual.max((vtt - v2[n * nx + j] + v4[n * nx + j]).norm());
        }
    }
    report.set("pde_residual", residual);

    let (tv, td) = kernel.origin_traces();
    let trace_v = tv.iter().zip(&h1.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let trace_d = td.iter().zip(&h2.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    report.set("trace_error_value", trace_v);
    report.set("trace_error_slope", trace_d);

    let xs_pos: Vec<f64> = (1..grid.nx / 2).map(|i| i as f64 * dx).collect();
    let mut init_v = 0.0f64;
    let mut init_vt = 0.0f64;
    for &x in &xs_pos {
        init_v = init_v.max(q.evaluate_point(x, 0.0, 0, 0, true).norm());
        init_vt = init_vt.max(q.evaluate_point(x, 0.0, 0, 1, true).norm());
    }
    report.set("initial_value", init_v);
    report.set("initial_velocity", init_vt);
    report.set("z_cutoff", kernel.z_cutoff);
    report.set("nodes", kernel.node_count() as f64);
    Ok(report)
}
