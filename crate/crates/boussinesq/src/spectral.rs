//! Discrete Fourier analysis on the truncated line `[-L, L)`.
//!
//! Forward transform carries `dx`, inverse carries `dxi / 2pi`, so
//! `F(xi) ~ ∫ e^{-i x xi} f(x) dx`. Spectra are stored in FFT order.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// `sin(x)/x` with the removable point filled in.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Box is `[-half_width, half_width)`.
    pub half_width: f64,
    pub nx: usize,
    pub t_max: f64,
    pub nt: usize,
    pub pad_factor: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, nx: usize, t_max: f64, nt: usize, pad_factor: usize) -> Result<Self> {
        let g = GridSpec { half_width, nx, t_max, nt, pad_factor };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width {} must be positive", self.half_width)));
        }
        if self.nx < 8 || !self.nx.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("nx = {} must be a power of two >= 8", self.nx)));
        }
        if self.nt < 8 {
            return Err(Error::InvalidGrid(format!("nt = {} must be >= 8", self.nt)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max {} must be positive", self.t_max)));
        }
        if self.pad_factor < 1 {
            return Err(Error::InvalidGrid("pad_factor must be >= 1".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dxi(&self) -> f64 {
        PI / self.half_width
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.nt - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    /// Index of the node at `x = 0`.
    pub fn origin(&self) -> usize {
        self.nx / 2
    }

    /// Signed mode number of FFT slot `k`.
    pub fn mode(&self, k: usize) -> i64 {
        signed_mode(k, self.nx)
    }

    pub fn xi(&self, k: usize) -> f64 {
        self.mode(k) as f64 * self.dxi()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.nx).map(|k| self.xi(k)).collect()
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|n| self.t(n)).collect()
    }

    pub fn with_nx(&self, nx: usize) -> Self {
        GridSpec { nx, ..*self }
    }

    pub fn with_nt(&self, nt: usize) -> Self {
        GridSpec { nt, ..*self }
    }
}

#[inline]
pub fn signed_mode(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || !(-2.0..=4.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("Sobolev index {s} outside [-2, 4]")));
        }
        Ok(SobolevIndex(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.nx {
            return Err(Error::InvalidGrid(format!("field has {} samples, grid has {}", values.len(), grid.nx)));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Field { grid, values: vec![C64::new(0.0, 0.0); grid.nx] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Field { grid, values: (0..grid.nx).map(|j| C64::new(f(grid.x(j)), 0.0)).collect() }
    }

    pub fn from_complex_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Self {
        Field { grid, values: (0..grid.nx).map(|j| f(grid.x(j))).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Imaginary parts below `1e-10` of the largest magnitude.
    pub fn is_real(&self) -> bool {
        let peak = self.max_abs();
        self.values.iter().all(|v| v.im.abs() <= 1e-10 * peak.max(f64::MIN_POSITIVE))
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Discrete L2 norm `(dx Σ |f_j|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scale(&self, a: C64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|v| v * a).collect() }
    }

    pub fn axpy(&self, a: C64, other: &Field) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: GridSpec,
    pub coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn zeros(grid: GridSpec) -> Self {
        Spectrum { grid, coeffs: vec![C64::new(0.0, 0.0); grid.nx] }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.grid.frequencies()
    }

    /// `(dxi/2pi Σ |F_k|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dxi() / (2.0 * PI) * self.coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Value of the inverse transform at `x = 0`.
    pub fn value_at_origin(&self) -> C64 {
        self.coeffs.iter().sum::<C64>() * (self.grid.dxi() / (2.0 * PI))
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalised in-place FFT (`exp(-2 pi i jk/n)` forward).
pub fn fft_in_place(buf: &mut [C64], inverse: bool) {
    fft_plan(buf.len(), inverse).process(buf);
}

/// Phase `exp(i xi_k L) = (-1)^k` that shifts the box origin to `-L`.
#[inline]
fn origin_phase(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn forward_transform(f: &Field) -> Spectrum {
    let mut buf = f.values.clone();
    fft_in_place(&mut buf, false);
    let dx = f.grid.dx();
    for (k, c) in buf.iter_mut().enumerate() {
        *c *= dx * origin_phase(k);
    }
    Spectrum { grid: f.grid, coeffs: buf }
}

pub fn inverse_transform(s: &Spectrum) -> Field {
    let mut buf: Vec<C64> = s.coeffs.iter().enumerate().map(|(k, c)| c * origin_phase(k)).collect();
    fft_in_place(&mut buf, true);
    let scale = s.grid.dxi() / (2.0 * PI);
    for c in buf.iter_mut() {
        *c *= scale;
    }
    Field { grid: s.grid, values: buf }
}

pub fn apply_multiplier<M, V>(spec: &Spectrum, m: M) -> Result<Spectrum>
where
    M: Fn(f64) -> V,
    V: Into<C64>,
{
    let mut out = spec.coeffs.clone();
    for (k, c) in out.iter_mut().enumerate() {
        let xi = spec.grid.xi(k);
        let mv: C64 = m(xi).into();
        if !(mv.re.is_finite() && mv.im.is_finite()) {
            return Err(Error::NonFiniteMultiplier { xi });
        }
        *c *= mv;
    }
    Ok(Spectrum { grid: spec.grid, coeffs: out })
}

/// `order`-th spectral derivative. The Nyquist slot is dropped for odd orders
/// so real fields stay real.
pub fn derivative(f: &Field, order: u32) -> Field {
    let mut s = forward_transform(f);
    for (k, c) in s.coeffs.iter_mut().enumerate() {
        *c *= (I * f.grid.xi(k)).powu(order);
    }
    if order % 2 == 1 {
        s.coeffs[f.grid.nx / 2] = C64::new(0.0, 0.0);
    }
    inverse_transform(&s)
}

pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    spectrum_sobolev_norm(&forward_transform(f), s)
}

pub fn spectrum_sobolev_norm(spec: &Spectrum, s: f64) -> f64 {
    let sum: f64 = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| bracket(spec.grid.xi(k)).powf(2.0 * s) * c.norm_sqr())
        .sum();
    (spec.grid.dxi() / (2.0 * PI) * sum).sqrt()
}

/// Sobolev norm of uniformly spaced samples treated as one period of length `n * step`.
/// Used for temporal norms, with the same conventions as the spatial ones.
pub fn sobolev_norm_samples(values: &[C64], step: f64, s: f64) -> f64 {
    let n = values.len();
    let mut buf = values.to_vec();
    fft_in_place(&mut buf, false);
    let dfreq = 2.0 * PI / (n as f64 * step);
    let sum: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let f = signed_mode(k, n) as f64 * dfreq;
            bracket(f).powf(2.0 * s) * (c * step).norm_sqr()
        })
        .sum();
    (dfreq / (2.0 * PI) * sum).sqrt()
}

/// Pointwise square with zero-padding by `pad` (exact de-aliasing for `pad >= 2`),
/// returned on the original frequency set.
pub fn padded_square(spec: &Spectrum, pad: usize) -> Spectrum {
    let g = spec.grid;
    let n = g.nx;
    if pad <= 1 {
        let f = inverse_transform(spec);
        let sq = Field { grid: g, values: f.values.iter().map(|v| v * v).collect() };
        return forward_transform(&sq);
    }
    let big = g.with_nx(n * pad);
    let nb = big.nx;
    let mut wide = Spectrum::zeros(big);
    for k in 0..n {
        let m = signed_mode(k, n);
        let slot = if m >= 0 { m as usize } else { (nb as i64 + m) as usize };
        wide.coeffs[slot] = spec.coeffs[k];
    }
    let f = inverse_transform(&wide);
    let sq = Field { grid: big, values: f.values.iter().map(|v| v * v).collect() };
    let sq_hat = forward_transform(&sq);
    let mut out = Spectrum::zeros(g);
    for k in 0..n {
        let m = signed_mode(k, n);
        let slot = if m >= 0 { m as usize } else { (nb as i64 + m) as usize };
        out.coeffs[k] = sq_hat.coeffs[slot];
    }
    out
}

/// Largest `|F|` relative to the peak over modes with `|k| > frac * n/2`.
pub fn spectral_tail(spec: &Spectrum, frac: f64) -> f64 {
    let n = spec.grid.nx;
    let peak = spec.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let cut = frac * (n / 2) as f64;
    spec.coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| (signed_mode(*k, n).abs() as f64) > cut)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
        / peak
}

/// Largest sample magnitude among the last `width` nodes on either box edge, relative to the peak.
pub fn edge_tail(values: &[C64], width: usize) -> (f64, f64) {
    let n = values.len();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = values[..width]
        .iter()
        .chain(&values[n - width..])
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    (tail, peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(l: f64, n: usize) -> GridSpec {
        GridSpec::new(l, n, 1.0, 16, 2).unwrap()
    }

    fn random_field(g: GridSpec, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field { grid: g, values: (0..g.nx).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1.0, 12, 1.0, 16, 2).is_err());
        assert!(GridSpec::new(1.0, 4, 1.0, 16, 2).is_err());
        assert!(GridSpec::new(-1.0, 16, 1.0, 16, 2).is_err());
        assert!(GridSpec::new(1.0, 16, 1.0, 4, 2).is_err());
        let g = grid(8.0, 64);
        assert_eq!(g.x(g.origin()), 0.0);
        assert!((g.dxi() - PI / 8.0).abs() < 1e-15);
        assert_eq!(g.mode(32), -32);
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = grid(4.0, 32);
        let s = forward_transform(&Field::zeros(g));
        assert!(s.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn plane_wave_is_a_spike_of_mass_2l() {
        let g = grid(5.0, 64);
        let k0 = 3usize;
        let xi0 = g.xi(k0);
        let f = Field::from_complex_fn(g, |x| (I * xi0 * x).exp());
        let s = forward_transform(&f);
        for (k, c) in s.coeffs.iter().enumerate() {
            let expect = if k == k0 { 2.0 * g.half_width } else { 0.0 };
            assert!((c - expect).norm() < 1e-12, "k = {k}: {c}");
        }
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = grid(12.0, 256);
        let f = Field::from_fn(g, |x| (-0.5 * x * x).exp());
        let s = forward_transform(&f);
        for (k, c) in s.coeffs.iter().enumerate() {
            let xi = g.xi(k);
            let exact = (2.0 * PI).sqrt() * (-0.5 * xi * xi).exp();
            assert!((c - exact).norm() < 1e-8, "xi = {xi}");
        }
    }

    #[test]
    fn identity_and_derivative_multipliers() {
        let g = grid(PI, 64);
        let f = Field::from_fn(g, |x| x.sin());
        let s = forward_transform(&f);
        let same = apply_multiplier(&s, |_| 1.0).unwrap();
        assert_eq!(same, s);
        let d = inverse_transform(&apply_multiplier(&s, |xi| I * xi).unwrap());
        for j in 0..g.nx {
            assert!((d.values[j] - g.x(j).cos()).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_multiplier_is_rejected() {
        let g = grid(PI, 16);
        let s = forward_transform(&Field::from_fn(g, |x| x.cos()));
        let err = apply_multiplier(&s, |xi| 1.0 / xi).unwrap_err();
        assert_eq!(err, Error::NonFiniteMultiplier { xi: 0.0 });
    }

    #[test]
    fn bracket_multiplier_matches_direct_sum() {
        // band-limited random field, then the direct-summation oracle
        let g = grid(6.0, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut spec = Spectrum::zeros(g);
        for k in 0..g.nx {
            if g.mode(k).abs() < 12 {
                spec.coeffs[k] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let out = inverse_transform(&apply_multiplier(&spec, |xi| bracket(xi).powi(-2)).unwrap());
        for j in 0..g.nx {
            let x = g.x(j);
            let direct: C64 = (0..g.nx)
                .map(|k| {
                    let xi = g.xi(k);
                    spec.coeffs[k] * bracket(xi).powi(-2) * (I * xi * x).exp()
                })
                .sum::<C64>()
                * (g.dxi() / (2.0 * PI));
            assert!((out.values[j] - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn sobolev_norm_basics() {
        let g = grid(12.0, 256);
        assert_eq!(sobolev_norm(&Field::zeros(g), 1.0), 0.0);
        let f = Field::from_fn(g, |x| (-0.5 * x * x).exp());
        let l2 = f.l2_norm();
        assert!((sobolev_norm(&f, 0.0) - l2).abs() < 1e-10 * l2);
    }

    #[test]
    fn gaussian_h1_norm_matches_fine_quadrature() {
        // oracle: (∫ <xi>^2 2pi e^{-xi^2} dxi / 2pi)^{1/2} by fine midpoint sums
        let n = 400_000;
        let (a, b) = (-20.0, 20.0);
        let h = (b - a) / n as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let xi = a + (i as f64 + 0.5) * h;
                (1.0 + xi * xi) * (-xi * xi).exp()
            })
            .sum::<f64>()
            * h;
        let oracle = integral.sqrt();
        let g = grid(12.0, 256);
        let f = Field::from_fn(g, |x| (-0.5 * x * x).exp());
        assert!((sobolev_norm(&f, 1.0) - oracle).abs() < 1e-6);
    }

    #[test]
    fn temporal_norm_matches_spatial_convention() {
        let g = grid(8.0, 128);
        let f = Field::from_fn(g, |x| (-x * x).exp());
        let a = sobolev_norm(&f, 0.7);
        let b = sobolev_norm_samples(&f.values, g.dx(), 0.7);
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn padded_square_is_exact_for_band_limited_input() {
        let g = grid(PI, 32);
        let f = Field::from_fn(g, |x| (7.0 * x).cos() + 0.3 * (5.0 * x).sin());
        let sq = inverse_transform(&padded_square(&forward_transform(&f), 2));
        // (cos 7x)^2 has a 14x mode that aliases without padding; with padding it is dropped
        // from the 32-point set (|14| < 16 keeps it) - compare against direct square
        for j in 0..g.nx {
            let x = g.x(j);
            let v = (7.0 * x).cos() + 0.3 * (5.0 * x).sin();
            assert!((sq.values[j].re - v * v).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip(seed in 0u64..10_000, log_n in 3u32..9) {
            let g = grid(3.0, 1 << log_n);
            let f = random_field(g, seed);
            let back = inverse_transform(&forward_transform(&f));
            let scale = f.max_abs();
            for (a, b) in f.values.iter().zip(&back.values) {
                prop_assert!((a - b).norm() < 1e-12 * scale);
            }
        }

        #[test]
        fn parseval(seed in 0u64..10_000) {
            let g = grid(5.0, 128);
            let f = random_field(g, seed);
            let s = forward_transform(&f);
            let (a, b) = (f.l2_norm(), s.l2_norm());
            prop_assert!((a - b).abs() < 1e-10 * a);
        }

        #[test]
        fn sobolev_monotone_in_s(seed in 0u64..10_000, s1 in -2.0f64..4.0, ds in 0.0f64..2.0) {
            let g = grid(5.0, 64);
            let f = random_field(g, seed);
            prop_assert!(sobolev_norm(&f, s1) <= sobolev_norm(&f, s1 + ds) * (1.0 + 1e-14));
        }

        #[test]
        fn multiplier_is_linear(seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let g = grid(5.0, 64);
            let f = random_field(g, seed);
            let h = random_field(g, seed + 1);
            let m = |xi: f64| C64::new(bracket(xi).powf(-1.5), xi.sin());
            let combo = forward_transform(&f.scale(a.into()).axpy(b.into(), &h));
            let lhs = apply_multiplier(&combo, m).unwrap();
            let mf = apply_multiplier(&forward_transform(&f), m).unwrap();
            let mh = apply_multiplier(&forward_transform(&h), m).unwrap();
            for k in 0..g.nx {
                let rhs = mf.coeffs[k] * a + mh.coeffs[k] * b;
                prop_assert!((lhs.coeffs[k] - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
            }
        }
    }
}
