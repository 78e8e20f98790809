//! Independent finite-difference solver on `[0, x_max]`: leapfrog in time, centred
//! differences in space, ghost node at the wall and a sponge layer at the far end.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::halfline::{extend, ExtensionMethod};
use crate::picard::IBVPData;
use crate::spectral::{forward_transform, Spectrum, C64, I};

/// `dt / dx^2` used when none is given. The stability sweep in the tests puts the
/// leapfrog limit for the five-point fourth difference just below 0.5.
pub const DEFAULT_COURANT: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FDGrid {
    pub x_max: f64,
    /// Nodes `x_i = i dx`, `i = 0..m_x`.
    pub m_x: usize,
    pub dt: f64,
    /// Sponge width in nodes.
    pub damping_width: usize,
    /// Peak damping rate inside the sponge.
    pub damping_strength: f64,
}

impl FDGrid {
    pub fn new(x_max: f64, m_x: usize, dt: f64, damping_width: usize) -> Result<Self> {
        let g = FDGrid { x_max, m_x, dt, damping_width, damping_strength: 40.0 };
        g.validate()?;
        Ok(g)
    }

    /// Step `dx` and `dt = courant dx^2`, rounded down so that `dt` divides `sample_dt`.
    pub fn with_spacing(x_max: f64, dx: f64, courant: f64, sample_dt: f64, damping_len: f64) -> Result<Self> {
        let m_x = (x_max / dx).round() as usize + 1;
        let per = (sample_dt / (courant * dx * dx)).ceil().max(1.0);
        let width = ((damping_len / dx).round() as usize).max(10);
        Self::new(x_max, m_x, sample_dt / per, width)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_x < self.damping_width + 8 || self.damping_width < 10 {
            return Err(Error::InvalidParameter("fd grid needs a sponge of at least 10 nodes and room inside it".into()));
        }
        if !(self.dt > 0.0 && self.x_max > 0.0) {
            return Err(Error::InvalidParameter("fd grid needs positive dt and x_max".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.x_max / (self.m_x - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    fn damping(&self, i: usize) -> f64 {
        let start = self.m_x - self.damping_width;
        if i < start {
            return 0.0;
        }
        let r = (i - start) as f64 / self.damping_width as f64;
        self.damping_strength * r * r
    }
}

/// A problem stated by closures, used directly for manufactured solutions.
pub struct FDProblem<'a> {
    pub initial: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    /// `u_t(x, 0)`.
    pub velocity: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub h1: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub h2: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub forcing: Option<Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>>,
    /// Drop `(u^2)_xx`.
    pub linear: bool,
}

/// Snapshots `values[n][i] = u(x_i, n * sample_dt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FDSolution {
    pub grid: FDGrid,
    pub sample_dt: f64,
    pub values: Vec<Vec<f64>>,
}

impl FDSolution {
    /// Value at a node-aligned `x`.
    pub fn at(&self, n: usize, x: f64) -> f64 {
        let pos = x / self.grid.dx();
        let i = pos.round();
        debug_assert!((pos - i).abs() < 1e-6, "x = {x} is not an fd node");
        self.values[n][i as usize]
    }
}

/// Evaluate the band-limited interpolant of a spectrum at arbitrary points.
fn spectral_interpolant(spec: &Spectrum, xs: &[f64]) -> Vec<f64> {
    let g = spec.grid;
    let scale = g.dxi() / (2.0 * std::f64::consts::PI);
    xs.par_iter()
        .map(|&x| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..g.nx {
                acc += spec.coeffs[k] * (I * g.xi(k) * x).exp();
            }
            acc.re * scale
        })
        .collect()
}

/// Solve the data's problem on `[0, t_end]`, sampled at `sample_dt` (a multiple of `grid.dt`).
/// Initial data are interpolated spectrally from the smooth-decay extension (`u_t = g'`),
/// boundary data by cubics between their samples.
pub fn fd_solve(
    data: &IBVPData,
    grid: &FDGrid,
    t_end: f64,
    sample_dt: f64,
    forcing: Option<&(dyn Fn(f64, f64) -> f64 + Sync)>,
) -> Result<FDSolution> {
    let xs: Vec<f64> = (0..grid.m_x).map(|i| grid.x(i)).collect();
    let fe = forward_transform(&extend(&data.f, ExtensionMethod::SmoothDecayReflection)?);
    let mut ge = forward_transform(&extend(&data.g, ExtensionMethod::SmoothDecayReflection)?);
    for (k, c) in ge.coeffs.iter_mut().enumerate() {
        *c *= I * ge.grid.xi(k);
    }
    ge.coeffs[ge.grid.nx / 2] = C64::new(0.0, 0.0);
    let f_vals = spectral_interpolant(&fe, &xs);
    let v_vals = spectral_interpolant(&ge, &xs);
    let lookup = move |vals: &Vec<f64>, x: f64| vals[(x / grid.dx()).round() as usize];
    let problem = FDProblem {
        initial: Box::new(move |x| lookup(&f_vals, x)),
        velocity: Box::new(move |x| lookup(&v_vals, x)),
        h1: Box::new(|t| data.h1.at(t)),
        h2: Box::new(|t| data.h2.at(t)),
        forcing: forcing.map(|f| Box::new(f) as Box<dyn Fn(f64, f64) -> f64 + Sync>),
        linear: false,
    };
    fd_solve_problem(&problem, grid, t_end, sample_dt)
}

pub fn fd_solve_problem(problem: &FDProblem, grid: &FDGrid, t_end: f64, sample_dt: f64) -> Result<FDSolution> {
    grid.validate()?;
    let per = (sample_dt / grid.dt).round() as usize;
    if per == 0 || ((per as f64) * grid.dt - sample_dt).abs() > 1e-9 * sample_dt {
        return Err(Error::InvalidParameter("sample_dt must be a multiple of the fd step".into()));
    }
    let m = grid.m_x;
    let dx = grid.dx();
    let dt = grid.dt;
    let steps = (t_end / dt).round() as usize;
    let damp: Vec<f64> = (0..m).map(|i| grid.damping(i)).collect();

    // `u_xx - u_xxxx - (u^2)_xx + F` at nodes 1..m; zeros past the far end.
    // Padded layout `w[i + 2] = u_i`, with the ghost `u_{-1}` fixed by the slope condition.
    let mut w = vec![0.0; m + 4];
    let mut sq = vec![0.0; m + 4];
    let mut rhs = |u: &[f64], t: f64, out: &mut [f64]| {
        w[2..m + 2].copy_from_slice(u);
        w[1] = u[1] - 2.0 * dx * (problem.h2)(t);
        for (s, v) in sq.iter_mut().zip(w.iter()) {
            *s = v * v;
        }
        let (w, sq) = (&w, &sq);
        out[0] = 0.0;
        out[1..m].par_iter_mut().enumerate().with_min_len(512).for_each(|(j, o)| {
            let i = j + 1;
            let q = i + 2;
            let d2 = (w[q + 1] - 2.0 * w[q] + w[q - 1]) / (dx * dx);
            let d4 = (w[q + 2] - 4.0 * w[q + 1] + 6.0 * w[q] - 4.0 * w[q - 1] + w[q - 2]) / dx.powi(4);
            let nl = if problem.linear { 0.0 } else { (sq[q + 1] - 2.0 * sq[q] + sq[q - 1]) / (dx * dx) };
            let force = problem.forcing.as_ref().map_or(0.0, |f| f(i as f64 * dx, t));
            *o = d2 - d4 - nl + force;
        });
    };

    let mut prev: Vec<f64> = (0..m).map(|i| (problem.initial)(grid.x(i))).collect();
    prev[0] = (problem.h1)(0.0);
    let mut acc = vec![0.0; m];
    rhs(&prev, 0.0, &mut acc);
    // Taylor start, damped like the leapfrog update.
    let mut cur: Vec<f64> = (0..m)
        .map(|i| {
            let v = (problem.velocity)(grid.x(i));
            prev[i] + dt * v + 0.5 * dt * dt * (acc[i] - damp[i] * v)
        })
        .collect();
    cur[0] = (problem.h1)(dt);

    let mut values = vec![prev.clone()];
    if per == 1 {
        values.push(cur.clone());
    }
    let mut next = vec![0.0; m];
    for step in 1..steps {
        let t = step as f64 * dt;
        rhs(&cur, t, &mut acc);
        let mut peak = 0.0f64;
        for i in 1..m {
            let c = 0.5 * damp[i] * dt;
            next[i] = (2.0 * cur[i] - (1.0 - c) * prev[i] + dt * dt * acc[i]) / (1.0 + c);
            peak = peak.max(next[i].abs());
        }
        next[0] = (problem.h1)(t + dt);
        if !(peak <= 1e6) {
            return Err(Error::StabilityViolation { step, max: peak });
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if (step + 1) % per == 0 {
            values.push(cur.clone());
        }
    }
    Ok(FDSolution { grid: *grid, sample_dt, values })
}

/// Richardson combination `(4 u_{dx/2} - u_dx) / 3` of two runs, on the coarse nodes.
/// Cancels the `dx^2` error term; `dt ~ dx^2` keeps the time error at the same order.
pub fn richardson(coarse: &FDSolution, fine: &FDSolution) -> Result<FDSolution> {
    let ratio = (coarse.grid.dx() / fine.grid.dx()).round() as usize;
    if ratio != 2 || coarse.values.len() != fine.values.len() {
        return Err(Error::InvalidParameter("richardson needs dx halved and matching samples".into()));
    }
    let values = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(c, f)| c.iter().enumerate().map(|(i, v)| (4.0 * f[2 * i] - v) / 3.0).collect())
        .collect();
    Ok(FDSolution { grid: coarse.grid, sample_dt: coarse.sample_dt, values })
}

/// Two runs at `dx` and `dx / 2`, extrapolated.
pub fn fd_solve_extrapolated(
    data: &IBVPData,
    x_max: f64,
    dx: f64,
    damping_len: f64,
    t_end: f64,
    sample_dt: f64,
) -> Result<FDSolution> {
    let coarse = FDGrid::with_spacing(x_max, dx, DEFAULT_COURANT, sample_dt, damping_len)?;
    let fine = FDGrid::with_spacing(x_max, 0.5 * dx, DEFAULT_COURANT, sample_dt, damping_len)?;
    richardson(&fd_solve(data, &coarse, t_end, sample_dt, None)?, &fd_solve(data, &fine, t_end, sample_dt, None)?)
}

/// Discrete linear energy `sum (u_t^2 + u_x^2 + u_xx^2) dx / 2` over `[0, x_end]`,
/// with `u_t` from two consecutive snapshots.
pub fn linear_energy(before: &[f64], after: &[f64], dx: f64, dt: f64, x_end: f64) -> f64 {
    let last = ((x_end / dx) as usize).min(before.len() - 2);
    let mid: Vec<f64> = before.iter().zip(after).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut e = 0.0;
    for i in 1..last {
        let ut = (after[i] - before[i]) / dt;
        let ux = (mid[i + 1] - mid[i]) / dx;
        let uxx = (mid[i + 1] - 2.0 * mid[i] + mid[i - 1]) / (dx * dx);
        e += ut * ut + ux * ux + uxx * uxx;
    }
    0.5 * e * dx
}
