//! Samples of `u(x, t)` on the tensor grid, time-major.

use crate::spectral::{forward_transform, inverse_transform, Field, GridSpec, Spectrum, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    pub grid: GridSpec,
    /// `values[n * nx + j] = u(x_j, t_n)`.
    pub values: Vec<C64>,
    /// Scale `T` of the time window the field was built with.
    pub window: f64,
}

impl SpaceTimeField {
    pub fn zeros(grid: GridSpec, window: f64) -> Self {
        SpaceTimeField { grid, values: vec![C64::new(0.0, 0.0); grid.nx * grid.nt], window }
    }

    pub fn from_fn(grid: GridSpec, window: f64, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut out = Self::zeros(grid, window);
        for n in 0..grid.nt {
            let t = grid.t(n);
            for j in 0..grid.nx {
                out.values[n * grid.nx + j] = f(grid.x(j), t);
            }
        }
        out
    }

    pub fn from_slices(grid: GridSpec, window: f64, slices: Vec<Field>) -> Self {
        let mut values = Vec::with_capacity(grid.nx * grid.nt);
        for s in slices {
            values.extend(s.values);
        }
        SpaceTimeField { grid, values, window }
    }

    #[inline]
    pub fn get(&self, n: usize, j: usize) -> C64 {
        self.values[n * self.grid.nx + j]
    }

    pub fn row(&self, n: usize) -> &[C64] {
        let nx = self.grid.nx;
        &self.values[n * nx..(n + 1) * nx]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [C64] {
        let nx = self.grid.nx;
        &mut self.values[n * nx..(n + 1) * nx]
    }

    pub fn slice(&self, n: usize) -> Field {
        Field { grid: self.grid, values: self.row(n).to_vec() }
    }

    pub fn slice_spectrum(&self, n: usize) -> Spectrum {
        forward_transform(&self.slice(n))
    }

    pub fn set_slice_from_spectrum(&mut self, n: usize, s: &Spectrum) {
        let f = inverse_transform(s);
        self.row_mut(n).copy_from_slice(&f.values);
    }

    /// Values along `x = 0`.
    pub fn origin_series(&self) -> Vec<C64> {
        let o = self.grid.origin();
        (0..self.grid.nt).map(|n| self.get(n, o)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &SpaceTimeField) -> SpaceTimeField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpaceTimeField) -> SpaceTimeField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, a: C64) -> SpaceTimeField {
        SpaceTimeField { values: self.values.iter().map(|v| v * a).collect(), ..self.clone() }
    }

    fn zip_with(&self, other: &SpaceTimeField, f: impl Fn(C64, C64) -> C64) -> SpaceTimeField {
        assert_eq!(self.values.len(), other.values.len(), "space-time shapes differ");
        SpaceTimeField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
            window: self.window,
        }
    }

    /// Multiply slice `n` by `w(t_n)`.
    pub fn time_weighted(&self, w: impl Fn(f64) -> f64) -> SpaceTimeField {
        let mut out = self.clone();
        for n in 0..self.grid.nt {
            let c = w(self.grid.t(n));
            for v in out.row_mut(n) {
                *v *= c;
            }
        }
        out
    }

    /// Real parts on `x >= 0`, time-major: `nt` rows of `nx / 2`.
    pub fn restrict_half(&self) -> Vec<Vec<f64>> {
        let o = self.grid.origin();
        (0..self.grid.nt).map(|n| self.row(n)[o..].iter().map(|v| v.re).collect()).collect()
    }
}
