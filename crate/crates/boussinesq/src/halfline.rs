//! Half-line data: extension to the full line, restriction, norm surrogates,
//! and the compatibility conditions at the corner `x = t = 0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutoff::{eta, smooth_step};
use crate::error::{Error, Result};
use crate::spectral::{derivative, inverse_transform, Spectrum, edge_tail, sobolev_norm, sobolev_norm_samples, Field, GridSpec, SobolevIndex, C64};

/// Edge width (in nodes) inspected by the tail check.
const TAIL_NODES: usize = 4;
/// Relative size allowed at the box edge.
const TAIL_TOL: f64 = 1e-12;

/// Samples at the nodes `x_j >= 0` of a grid, i.e. `x = 0, dx, ..., L - dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLineFunction {
    pub grid: GridSpec,
    pub samples: Vec<f64>,
    pub s: SobolevIndex,
}

impl HalfLineFunction {
    pub fn new(grid: GridSpec, samples: Vec<f64>, s: SobolevIndex) -> Result<Self> {
        if samples.len() != grid.nx / 2 {
            return Err(Error::InvalidGrid(format!(
                "half-line function needs {} samples, got {}",
                grid.nx / 2,
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("half-line samples must be finite".into()));
        }
        Ok(HalfLineFunction { grid, samples, s })
    }

    pub fn from_fn(grid: GridSpec, s: SobolevIndex, f: impl Fn(f64) -> f64) -> Self {
        let dx = grid.dx();
        let samples = (0..grid.nx / 2).map(|i| f(i as f64 * dx)).collect();
        HalfLineFunction { grid, samples, s }
    }

    pub fn zeros(grid: GridSpec, s: SobolevIndex) -> Self {
        HalfLineFunction { grid, samples: vec![0.0; grid.nx / 2], s }
    }

    /// Two-column `(x, value)` text file, linearly interpolated onto the grid; zero outside the listed range.
    pub fn from_file(grid: GridSpec, s: SobolevIndex, path: &Path) -> Result<Self> {
        let table = read_two_columns(path)?;
        Ok(Self::from_fn(grid, s, |x| interpolate(&table, x)))
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|i| i as f64 * self.grid.dx()).collect()
    }

    fn tail_check(&self) -> Result<()> {
        let peak = self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = self.samples.len();
        let tail = self.samples[n - TAIL_NODES..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 && tail > TAIL_TOL * peak {
            return Err(Error::TailViolation { tail, peak });
        }
        Ok(())
    }
}

/// Time samples `h(n dt)`, `n = 0..len`, of a boundary datum.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySignal {
    pub dt: f64,
    pub samples: Vec<f64>,
    /// Declared temporal regularity index.
    pub s: f64,
}

impl BoundarySignal {
    pub fn new(dt: f64, samples: Vec<f64>, s: f64) -> Result<Self> {
        if !(dt > 0.0) || samples.len() < 8 {
            return Err(Error::InvalidParameter("boundary signal needs dt > 0 and at least 8 samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("boundary samples must be finite".into()));
        }
        Ok(BoundarySignal { dt, samples, s })
    }

    /// Sampled on the time grid of `grid`.
    pub fn from_fn(grid: &GridSpec, s: f64, h: impl Fn(f64) -> f64) -> Self {
        BoundarySignal { dt: grid.dt(), samples: (0..grid.nt).map(|n| h(grid.t(n))).collect(), s }
    }

    pub fn zeros(grid: &GridSpec, s: f64) -> Self {
        BoundarySignal { dt: grid.dt(), samples: vec![0.0; grid.nt], s }
    }

    pub fn from_file(grid: &GridSpec, s: f64, path: &Path) -> Result<Self> {
        let table = read_two_columns(path)?;
        Ok(Self::from_fn(grid, s, |t| interpolate(&table, t)))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|n| n as f64 * self.dt).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| *v == 0.0)
    }

    /// True when every sample after `t_max - margin` is below `tol` times the peak.
    pub fn supported_before(&self, margin: f64, tol: f64) -> bool {
        let peak = self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = self.t_max() - margin;
        self.samples
            .iter()
            .enumerate()
            .filter(|(n, _)| *n as f64 * self.dt > cut)
            .all(|(_, v)| v.abs() <= tol * peak)
    }

    /// Cubic interpolation between samples; zero beyond the last sample.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.samples.len();
        let pos = t / self.dt;
        if pos > (n - 1) as f64 + 1e-9 {
            return 0.0;
        }
        let base = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let s = pos - base as f64;
        let y = &self.samples[base..base + 4];
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0 * y[0] + s * (s - 2.0) * (s - 3.0) / 2.0 * y[1]
            - s * (s - 1.0) * (s - 3.0) / 2.0 * y[2]
            + s * (s - 1.0) * (s - 2.0) / 6.0 * y[3]
    }

    pub fn value_at_zero(&self) -> f64 {
        quadratic_at_zero(&self.samples, 0.0, self.dt)
    }

    pub fn sub(&self, other: &BoundarySignal) -> BoundarySignal {
        BoundarySignal {
            dt: self.dt,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
            s: self.s,
        }
    }

    pub fn scale(&self, a: f64) -> BoundarySignal {
        BoundarySignal { dt: self.dt, samples: self.samples.iter().map(|v| a * v).collect(), s: self.s }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionMethod {
    Zero,
    EvenReflection,
    SmoothDecayReflection,
}

impl ExtensionMethod {
    pub const ALL: [ExtensionMethod; 3] =
        [ExtensionMethod::Zero, ExtensionMethod::EvenReflection, ExtensionMethod::SmoothDecayReflection];
}

/// Extend nonnegative-side samples `h[0..n]` (spacing `step`) to the `2n` nodes `-n..n-1`.
///
/// The smooth variant uses `3h(-x) - 2h(-2x)`, which matches value and slope at 0,
/// tapered by `eta(x / l)` with `l` an eighth of the half-length.
pub fn extend_samples(h: &[f64], method: ExtensionMethod) -> Vec<f64> {
    let n = h.len();
    let at = |k: usize| if k < n { h[k] } else { 0.0 };
    let taper_len = n as f64 / 8.0;
    let mut out = vec![0.0; 2 * n];
    out[n..].copy_from_slice(h);
    for m in 1..=n {
        out[n - m] = match method {
            ExtensionMethod::Zero => 0.0,
            ExtensionMethod::EvenReflection => at(m),
            ExtensionMethod::SmoothDecayReflection => eta(m as f64 / taper_len) * (3.0 * at(m) - 2.0 * at(2 * m)),
        };
    }
    out
}

pub fn extend(h: &HalfLineFunction, method: ExtensionMethod) -> Result<Field> {
    h.tail_check()?;
    let values = extend_samples(&h.samples, method).into_iter().map(|v| C64::new(v, 0.0)).collect();
    Field::new(h.grid, values)
}

/// Real parts at the nodes `x >= 0`.
pub fn restrict(u: &Field) -> HalfLineFunction {
    let o = u.grid.origin();
    HalfLineFunction {
        grid: u.grid,
        samples: u.values[o..].iter().map(|v| v.re).collect(),
        s: SobolevIndex::new(0.0).unwrap(),
    }
}

/// Stand-in for the half-line norm: the norm of the smooth-decay reflection.
pub fn halfline_norm(h: &HalfLineFunction, s: f64) -> Result<f64> {
    Ok(sobolev_norm(&extend(h, ExtensionMethod::SmoothDecayReflection)?, s))
}

/// Temporal analogue of [`halfline_norm`] on the symmetric window `[-T, T)`.
pub fn signal_halfline_norm(h: &BoundarySignal, s: f64) -> f64 {
    let ext: Vec<C64> =
        extend_samples(&h.samples, ExtensionMethod::SmoothDecayReflection).into_iter().map(C64::from).collect();
    sobolev_norm_samples(&ext, h.dt, s)
}

/// `||chi h||_{H^s(R)}` on the symmetric window `[-T, T)`.
pub fn chi_norm(h: &BoundarySignal, s: f64) -> f64 {
    let ext: Vec<C64> = extend_samples(&h.samples, ExtensionMethod::Zero).into_iter().map(C64::from).collect();
    sobolev_norm_samples(&ext, h.dt, s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiNormReport {
    /// `None` for the all-zero signal (0/0).
    pub ratio: Option<f64>,
    pub bound: f64,
    pub flagged: bool,
}

pub fn chi_norm_check(h: &BoundarySignal, s: f64, bound: f64) -> Result<ChiNormReport> {
    if !(s > -0.5 && s < 1.5) || (s - 0.5).abs() < 1e-12 {
        return Err(Error::InvalidParameter(format!("chi multiplication needs -1/2 < s < 3/2, s != 1/2 (got {s})")));
    }
    let h0 = h.value_at_zero();
    if s > 0.5 && h0.abs() > 1e-8 {
        return Err(Error::CompatibilityViolation { value: h0, s });
    }
    let den = signal_halfline_norm(h, s);
    if den == 0.0 {
        return Ok(ChiNormReport { ratio: None, bound, flagged: false });
    }
    let ratio = chi_norm(h, s) / den;
    Ok(ChiNormReport { ratio: Some(ratio), bound, flagged: ratio > bound })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityVerdict {
    pub pass: bool,
    /// `|h1(0) - f(0)|` when that condition applies.
    pub value_gap: Option<f64>,
    /// `|h2(0) - f'(0)|` when that condition applies.
    pub slope_gap: Option<f64>,
}

pub fn check_compatibility(
    f: &HalfLineFunction,
    h1: &BoundarySignal,
    h2: &BoundarySignal,
    s: f64,
    tol: f64,
) -> CompatibilityVerdict {
    let mut verdict = CompatibilityVerdict { pass: true, value_gap: None, slope_gap: None };
    if s <= 0.5 {
        return verdict;
    }
    let f0 = quadratic_at_zero(&f.samples, 0.0, f.grid.dx());
    let gap = (h1.value_at_zero() - f0).abs();
    verdict.value_gap = Some(gap);
    verdict.pass &= gap < tol;
    if s > 1.5 {
        let slope = match extend(f, ExtensionMethod::SmoothDecayReflection) {
            Ok(ext) => derivative(&ext, 1).values[f.grid.origin()].re,
            Err(_) => f64::NAN,
        };
        let gap = (h2.value_at_zero() - slope).abs();
        verdict.slope_gap = Some(gap);
        verdict.pass &= gap < tol;
    }
    verdict
}

/// Quadratic through the first three samples (nodes `x0, x0+h, x0+2h`), evaluated at 0.
pub fn quadratic_at_zero(samples: &[f64], x0: f64, h: f64) -> f64 {
    let (y0, y1, y2) = (samples[0], samples[1], samples[2]);
    let u = -x0 / h;
    y0 + u * (y1 - y0) + 0.5 * u * (u - 1.0) * (y2 - 2.0 * y1 + y0)
}

/// Relative tail of a full-line field at the box edges.
pub fn field_tail(f: &Field) -> f64 {
    let (tail, peak) = edge_tail(&f.values, TAIL_NODES);
    if peak == 0.0 {
        0.0
    } else {
        tail / peak
    }
}

fn read_two_columns(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
        if cols.len() != 2 {
            return Err(Error::InvalidParameter(format!("{}:{}: expected two columns", path.display(), ln + 1)));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("{}:{}: bad number {s:?}", path.display(), ln + 1)))
        };
        rows.push((parse(cols[0])?, parse(cols[1])?));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidParameter(format!("{}: need at least two rows", path.display())));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows)
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (table[0], table[table.len() - 1]);
    if x < first.0 || x > last.0 {
        return 0.0;
    }
    let i = table.partition_point(|p| p.0 <= x).clamp(1, table.len() - 1);
    let (a, b) = (table[i - 1], table[i]);
    if b.0 == a.0 {
        return a.1;
    }
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// Rough random half-line data: Fourier amplitudes `amplitude <xi>^{-decay}` with uniform
/// random phases, windowed to `[0, 3]` by a smooth envelope vanishing at `x = 0`.
///
/// Each mode draws its phase from its own stream keyed by `(seed, mode index)`, so grids with
/// the same half-width but different `nx` share their common modes.
pub fn rough_random(grid: GridSpec, seed: u64, decay: f64, amplitude: f64) -> Result<HalfLineFunction> {
    if grid.half_width < 4.0 {
        return Err(Error::InvalidGrid("rough profile needs a half-width of at least 4".into()));
    }
    let n = grid.nx;
    let mut spec = Spectrum::zeros(grid);
    for m in 0..n / 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(m as u64));
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let xi = m as f64 * grid.dxi();
        let c = C64::from_polar(amplitude * (1.0 + xi * xi).powf(-decay / 2.0), phase);
        if m == 0 {
            spec.coeffs[0] = C64::new(c.re, 0.0);
        } else {
            spec.coeffs[m] = c;
            spec.coeffs[n - m] = c.conj();
        }
    }
    let full = inverse_transform(&spec);
    let o = grid.origin();
    let samples = (o..n)
        .map(|j| {
            let x = grid.x(j);
            full.values[j].re * eta(x - 1.0) * smooth_step(2.0 * x)
        })
        .collect();
    HalfLineFunction::new(grid, samples, SobolevIndex::new(0.0)?)
}
