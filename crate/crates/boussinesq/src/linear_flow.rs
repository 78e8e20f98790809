//! The free group on the line and its traces at `x = 0`.

use rayon::prelude::*;

use crate::cutoff::eta;
use crate::error::{Error, Result};
use crate::halfline::BoundarySignal;
use crate::spectral::{
    forward_transform, inverse_transform, sinc, sobolev_norm, sobolev_norm_samples, Field, Spectrum, C64, I,
};

/// `sqrt(xi^2 + xi^4)`.
#[inline]
pub fn dispersion(xi: f64) -> f64 {
    xi.abs() * (1.0 + xi * xi).sqrt()
}

/// `(u, u_t)` at a common time.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorState {
    pub u: Field,
    pub v: Field,
}

/// Advance `(u_hat, v_hat)` by `t` under `u_tt - u_xx + u_xxxx = 0`.
pub fn propagate_spectra(u: &Spectrum, v: &Spectrum, t: f64) -> (Spectrum, Spectrum) {
    let g = u.grid;
    let mut uo = Spectrum::zeros(g);
    let mut vo = Spectrum::zeros(g);
    for k in 0..g.nx {
        let w = dispersion(g.xi(k));
        let (c, s) = ((w * t).cos(), (w * t).sin());
        uo.coeffs[k] = c * u.coeffs[k] + t * sinc(w * t) * v.coeffs[k];
        vo.coeffs[k] = -w * s * u.coeffs[k] + c * v.coeffs[k];
    }
    (uo, vo)
}

pub fn propagate_state(state: &PropagatorState, t: f64) -> PropagatorState {
    let (u, v) = propagate_spectra(&forward_transform(&state.u), &forward_transform(&state.v), t);
    PropagatorState { u: inverse_transform(&u), v: inverse_transform(&v) }
}

/// Spectrum of the free solution with `u(0) = f`, `u_t(0) = g_x`.
///
/// The `i xi` from `g_x` is fused with `sin(t w)/w`, so the zero mode never divides.
pub fn free_propagate_spectrum(f_hat: &Spectrum, g_hat: &Spectrum, t: f64) -> Spectrum {
    let grid = f_hat.grid;
    let mut out = Spectrum::zeros(grid);
    for k in 0..grid.nx {
        let xi = grid.xi(k);
        let w = dispersion(xi);
        out.coeffs[k] = (w * t).cos() * f_hat.coeffs[k] + I * xi * t * sinc(w * t) * g_hat.coeffs[k];
    }
    out
}

pub fn free_propagate(f: &Field, g: &Field, t: f64) -> Field {
    if t == 0.0 {
        return f.clone();
    }
    inverse_transform(&free_propagate_spectrum(&forward_transform(f), &forward_transform(g), t))
}

/// Time derivative spectrum of the free solution.
pub fn free_velocity_spectrum(f_hat: &Spectrum, g_hat: &Spectrum, t: f64) -> Spectrum {
    let grid = f_hat.grid;
    let mut out = Spectrum::zeros(grid);
    for k in 0..grid.nx {
        let xi = grid.xi(k);
        let w = dispersion(xi);
        out.coeffs[k] = -w * (w * t).sin() * f_hat.coeffs[k] + I * xi * (w * t).cos() * g_hat.coeffs[k];
    }
    out
}

/// Per-mode energy `|v_hat|^2 + (xi^2 + xi^4)|u_hat|^2`.
pub fn mode_energy(u: &Spectrum, v: &Spectrum) -> Vec<f64> {
    (0..u.grid.nx)
        .map(|k| {
            let w = dispersion(u.grid.xi(k));
            v.coeffs[k].norm_sqr() + w * w * u.coeffs[k].norm_sqr()
        })
        .collect()
}

pub fn discrete_energy(u: &Spectrum, v: &Spectrum) -> f64 {
    0.5 * mode_energy(u, v).iter().sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePair {
    pub p1: BoundarySignal,
    pub p2: BoundarySignal,
    /// Window scale `T` of the `eta(t/T)` factor.
    pub window: f64,
}

/// `(w(0), w_x(0))` for a spectrum, by direct spectral sums. The Nyquist slot is
/// excluded from the derivative, matching [`crate::spectral::derivative`].
pub fn origin_values(spec: &Spectrum) -> (C64, C64) {
    let g = spec.grid;
    let scale = g.dxi() / (2.0 * std::f64::consts::PI);
    let mut v = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for k in 0..g.nx {
        v += spec.coeffs[k];
        if k != g.nx / 2 {
            d += I * g.xi(k) * spec.coeffs[k];
        }
    }
    (v * scale, d * scale)
}

/// Windowed boundary traces of the free flow: `eta(t/T) W(0, t)` and `eta(t/T) W_x(0, t)`.
pub fn trace_at_zero(f: &Field, g: &Field, dt: f64, nt: usize, window: f64) -> TracePair {
    let (fh, gh) = (forward_transform(f), forward_transform(g));
    let values: Vec<(f64, f64)> = (0..nt)
        .into_par_iter()
        .map(|n| {
            let t = n as f64 * dt;
            let cut = eta(t / window);
            if cut == 0.0 {
                return (0.0, 0.0);
            }
            let (v, d) = origin_values(&free_propagate_spectrum(&fh, &gh, t));
            (cut * v.re, cut * d.re)
        })
        .collect();
    TracePair {
        p1: BoundarySignal { dt, samples: values.iter().map(|p| p.0).collect(), s: 0.0 },
        p2: BoundarySignal { dt, samples: values.iter().map(|p| p.1).collect(), s: 0.0 },
        window,
    }
}

/// `||eta(t) W(0, t)||_{H_t^{(2s+1)/4}} / (||f||_{H^s} + ||g||_{H^{s-1}})`.
///
/// The trace is sampled on the symmetric window `[-t_half, t_half)` with `nt` points;
/// `t_half >= 2` so the window covers the support of `eta`.
pub fn kato_ratio(f: &Field, g: &Field, s: f64, t_half: f64, nt: usize) -> Result<f64> {
    if t_half < 2.0 || nt < 8 {
        return Err(Error::InvalidParameter("kato ratio needs t_half >= 2 and nt >= 8".into()));
    }
    let den = sobolev_norm(f, s) + sobolev_norm(g, s - 1.0);
    if den < 1e-14 {
        return Err(Error::DegenerateData(den));
    }
    let (fh, gh) = (forward_transform(f), forward_transform(g));
    let dt = 2.0 * t_half / nt as f64;
    let trace: Vec<C64> = (0..nt)
        .into_par_iter()
        .map(|n| {
            let t = -t_half + n as f64 * dt;
            let cut = eta(t);
            if cut == 0.0 {
                return C64::new(0.0, 0.0);
            }
            origin_values(&free_propagate_spectrum(&fh, &gh, t)).0 * cut
        })
        .collect();
    Ok(sobolev_norm_samples(&trace, dt, (2.0 * s + 1.0) / 4.0) / den)
}
