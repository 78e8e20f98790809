//! The quadratic forcing `G(u) = eta(t/T) (u^2)_xx` and the Duhamel integral
//! `D(t) = ∫_0^t W_2^{t-t'} G(t') dt'`, i.e. `D_tt - D_xx + D_xxxx = G` from rest.

use rayon::prelude::*;

use crate::cutoff::eta;
use crate::halfline::BoundarySignal;
use crate::linear_flow::{dispersion, origin_values, TracePair};
use crate::quad::gauss_legendre;
use crate::spacetime::SpaceTimeField;
use crate::spectral::{fft_in_place, GridSpec, forward_transform, inverse_transform, padded_square, signed_mode, sinc, Spectrum, C64};

/// Fraction of the Nyquist band kept in the forcing.
pub const FORCING_BAND: f64 = 2.0 / 3.0;

/// `xi^2 / sqrt(xi^2 + xi^4) = |xi| / <xi>`: the solution operator's `1/w` fused with
/// the two derivatives of the forcing.
pub fn m_fused_multiplier(xi: f64) -> f64 {
    xi.abs() / (1.0 + xi * xi).sqrt()
}

/// `eta(t/T) (u^2)_xx`, squared with zero-padding and band-limited to [`FORCING_BAND`].
pub fn nonlinearity(u: &SpaceTimeField, window: f64) -> SpaceTimeField {
    let g = u.grid;
    let pad = g.pad_factor.max(1);
    let cut = FORCING_BAND * (g.nx / 2) as f64;
    let mut out = SpaceTimeField::zeros(g, window);
    out.values.par_chunks_mut(g.nx).enumerate().for_each(|(n, row)| {
        let w = eta(g.t(n) / window);
        if w == 0.0 {
            return;
        }
        let slice = u.slice(n);
        if slice.values.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            return;
        }
        let mut sq = padded_square(&forward_transform(&slice), pad);
        for (k, c) in sq.coeffs.iter_mut().enumerate() {
            if (signed_mode(k, g.nx).abs() as f64) > cut {
                *c = C64::new(0.0, 0.0);
            } else {
                let xi = g.xi(k);
                *c *= -xi * xi * w;
            }
        }
        row.copy_from_slice(&inverse_transform(&sq).values);
    });
    out
}

/// Weights of the exact one-step update for `y'' + w^2 y = G` with `G` replaced by
/// the cubic through four neighbouring samples.
///
/// `sine[o][i] = ∫_0^dt sin(w(dt - r))/w L_i(r) dr` and `cosine[o][i]` likewise with
/// `cos(w(dt - r))`, where the stencil starts `o - 1` steps from the left end of the step.
#[derive(Clone, Copy, Debug)]
struct StepWeights {
    sine: [[f64; 4]; 3],
    cosine: [[f64; 4]; 3],
}

fn step_weights(w: f64, dt: f64, gx: &[f64], gw: &[f64]) -> StepWeights {
    let panels = ((w * dt / std::f64::consts::PI).ceil() as usize).max(1) + 1;
    let h = dt / panels as f64;
    let mut out = StepWeights { sine: [[0.0; 4]; 3], cosine: [[0.0; 4]; 3] };
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, wt) in gx.iter().zip(gw) {
            let r = a + 0.5 * h * (x + 1.0);
            let q = 0.5 * h * wt;
            let lag = dt - r;
            let ks = lag * sinc(w * lag) * q;
            let kc = (w * lag).cos() * q;
            // The step spans nodes 0..1 in units of dt; stencils start at -1, 0, -2.
            for (o, start) in [-1.0f64, 0.0, -2.0].iter().enumerate() {
                let basis = lagrange4(r / dt - start);
                for i in 0..4 {
                    out.sine[o][i] += ks * basis[i];
                    out.cosine[o][i] += kc * basis[i];
                }
            }
        }
    }
    out
}

/// Cubic Lagrange basis on nodes 0, 1, 2, 3.
#[inline]
fn lagrange4(s: f64) -> [f64; 4] {
    [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ]
}

/// Spectra of `D(t_n)` (no time window), time-major.
pub fn duhamel_spectra(forcing: &SpaceTimeField) -> Vec<C64> {
    let g = forcing.grid;
    let (nx, nt) = (g.nx, g.nt);
    let dt = g.dt();
    let mut hat = vec![C64::new(0.0, 0.0); nx * nt];
    hat.par_chunks_mut(nx).enumerate().for_each(|(n, row)| {
        if forcing.row(n).iter().any(|v| *v != C64::new(0.0, 0.0)) {
            row.copy_from_slice(&forward_transform(&forcing.slice(n)).coeffs);
        }
    });
    if nt < 4 {
        return vec![C64::new(0.0, 0.0); nx * nt];
    }
    let (gx, gw) = gauss_legendre(12);
    let columns: Vec<Vec<C64>> = (0..nx)
        .into_par_iter()
        .map(|k| {
            let w = dispersion(g.xi(k));
            let sw = step_weights(w, dt, &gx, &gw);
            let (c, s) = ((w * dt).cos(), (w * dt).sin());
            let mut col = vec![C64::new(0.0, 0.0); nt];
            let mut d = C64::new(0.0, 0.0);
            let mut dd = C64::new(0.0, 0.0);
            for n in 0..nt - 1 {
                let (o, first) = if n == 0 {
                    (1, 0)
                } else if n + 2 >= nt {
                    (2, nt - 4)
                } else {
                    (0, n - 1)
                };
                let mut is = C64::new(0.0, 0.0);
                let mut ic = C64::new(0.0, 0.0);
                for i in 0..4 {
                    let gv = hat[(first + i) * nx + k];
                    is += gv * sw.sine[o][i];
                    ic += gv * sw.cosine[o][i];
                }
                let next = c * d + dt * sinc(w * dt) * dd + is;
                dd = -w * s * d + c * dd + ic;
                d = next;
                col[n + 1] = d;
            }
            col
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); nx * nt];
    for (k, col) in columns.iter().enumerate() {
        for n in 0..nt {
            out[n * nx + k] = col[n];
        }
    }
    out
}

/// `eta(t/T) D(t)` on the grid, with `T` the forcing's window.
pub fn duhamel_integral(forcing: &SpaceTimeField) -> SpaceTimeField {
    windowed_field(&duhamel_spectra(forcing), forcing.grid, forcing.window)
}

/// `eta(t_n/T)` times the inverse transform of each time-major spectrum row.
pub fn windowed_field(hat: &[C64], g: GridSpec, window: f64) -> SpaceTimeField {
    let mut out = SpaceTimeField::zeros(g, window);
    let scale = g.dxi() / (2.0 * std::f64::consts::PI);
    out.values.par_chunks_mut(g.nx).enumerate().for_each(|(n, row)| {
        let cut = eta(g.t(n) / window);
        if cut == 0.0 {
            return;
        }
        let src = &hat[n * g.nx..(n + 1) * g.nx];
        if src.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            return;
        }
        for (k, (r, v)) in row.iter_mut().zip(src).enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *r = v * sign;
        }
        fft_in_place(row, true);
        for r in row.iter_mut() {
            *r *= scale * cut;
        }
    });
    out
}

/// `eta(t/T) D(0, t)` and `eta(t/T) D_x(0, t)`.
pub fn duhamel_traces(forcing: &SpaceTimeField, window: f64) -> TracePair {
    let hat = duhamel_spectra(forcing);
    traces_from_spectra(&hat, forcing, window)
}

pub fn traces_from_spectra(hat: &[C64], forcing: &SpaceTimeField, window: f64) -> TracePair {
    let g = forcing.grid;
    let (mut p1, mut p2) = (Vec::with_capacity(g.nt), Vec::with_capacity(g.nt));
    for n in 0..g.nt {
        let cut = eta(g.t(n) / window);
        let spec = Spectrum { grid: g, coeffs: hat[n * g.nx..(n + 1) * g.nx].to_vec() };
        let (v, d) = origin_values(&spec);
        p1.push(cut * v.re);
        p2.push(cut * d.re);
    }
    let dt = g.dt();
    TracePair {
        p1: BoundarySignal { dt, samples: p1, s: 0.0 },
        p2: BoundarySignal { dt, samples: p2, s: 0.0 },
        window,
    }
}
