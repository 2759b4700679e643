//! Uniform periodic grid, Fourier differentiation and quadrature.
//!
//! The domain is `[-L/2, L/2)` sampled at `x_j = -L/2 + j dx`. Transforms use
//! the unnormalized forward DFT; the inverse carries the `1/N`.
//! FFT plans are created once per grid and shared behind `Arc`; `rustfft`
//! plans are `Send + Sync`, so a grid can be used from several threads.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

pub struct Grid {
    n_points: usize,
    length: f64,
    dx: f64,
    coordinates: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }
}

/// Builds a shared grid; see [`Grid::new`].
pub fn make_grid(n_points: usize, length: f64) -> Result<Arc<Grid>> {
    Grid::new(n_points, length).map(Arc::new)
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and at least 8, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let dx = length / n_points as f64;
        let coordinates = (0..n_points)
            .map(|j| -0.5 * length + j as f64 * dx)
            .collect();
        let wavenumbers = (0..n_points)
            .map(|m| 2.0 * PI * mode_index(m, n_points) as f64 / length)
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);
        Ok(Grid {
            n_points,
            length,
            dx,
            coordinates,
            wavenumbers,
            forward,
            inverse,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Quadrature weight carried by every node.
    pub fn weight(&self) -> f64 {
        self.dx
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    /// Wavenumbers in FFT order: `0, 1, ..., N/2 - 1, -N/2, ..., -1` times `2 pi / L`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Unnormalized forward transform of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform (with the `1/N` factor) keeping the real part.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.n_points as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// Fourier multiplier `(i k)^order` with the Nyquist entry zeroed for odd orders.
    pub fn derivative_multiplier(&self, order: u32) -> Result<Vec<Complex64>> {
        if !(1..=3).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        let nyquist = self.nyquist_index();
        Ok(self
            .wavenumbers
            .iter()
            .enumerate()
            .map(|(m, &k)| {
                if m == nyquist && order % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(order)
                }
            })
            .collect())
    }

    /// Trapezoid sum `dx * sum_j values[j]`.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        self.dx * values.iter().sum::<f64>()
    }

    /// Integral of the trigonometric interpolant of `values` over `[a, b]`,
    /// with the interval clipped to the domain.
    pub fn integrate_interpolant(&self, values: &[f64], a: f64, b: f64) -> f64 {
        let half = 0.5 * self.length;
        let lo = a.max(-half);
        let hi = b.min(half);
        if hi <= lo {
            return 0.0;
        }
        let spectrum = self.forward(values);
        let n = self.n_points as f64;
        let nyquist = self.nyquist_index();
        // Interpolant: (1/N) sum_m c_m exp(i k_m (x + L/2)); the Nyquist mode
        // contributes its real cosine.
        let mut total = spectrum[0].re * (hi - lo);
        for (m, (&c, &k)) in spectrum.iter().zip(&self.wavenumbers).enumerate().skip(1) {
            let (s_hi, c_hi) = (k * (hi + half)).sin_cos();
            let (s_lo, c_lo) = (k * (lo + half)).sin_cos();
            if m == nyquist {
                total += c.re * (s_hi - s_lo) / k;
            } else {
                // integral of exp(i k s) = (exp(i k s) / (i k)); keep the real part
                let diff = Complex64::new(c_hi - c_lo, s_hi - s_lo);
                total += (c * diff / Complex64::new(0.0, k)).re;
            }
        }
        total / n
    }
}

fn mode_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Real samples of a function on a grid. Values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.n_points()];
        Field { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.coordinates().iter().map(|&x| f(x)).collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Pointwise map, re-validated for finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::new(self.grid.clone(), values)
    }

    /// Discrete L2 norm `sqrt(dx * sum u^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt() * self.grid.dx().sqrt()
    }
}

/// `order`-th derivative through the Fourier multiplier `(i k)^order`.
pub fn spectral_derivative(f: &Field, order: u32) -> Result<Field> {
    let grid = f.grid();
    let multiplier = grid.derivative_multiplier(order)?;
    let mut spectrum = grid.forward(f.values());
    for (c, m) in spectrum.iter_mut().zip(&multiplier) {
        *c *= m;
    }
    Field::new(grid.clone(), grid.inverse(spectrum))
}

/// `dx * sum_j density(x_j)`.
pub fn integrate(density: &Field) -> f64 {
    density.grid().integrate_values(density.values())
}
