//! Initial profiles: the focusing ground state, Gaussians and sampled data.

use std::sync::Arc;

use crate::grid::{integrate, spectral_derivative, Field, Grid};
use crate::{Error, Result};

/// Decay length of the ground state (`Q ~ exp(-|x|)` for every `p`).
pub const GROUND_STATE_WIDTH: f64 = 1.0;

/// Profiles must sit this many widths away from either edge.
pub const MARGIN_WIDTHS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    GroundState,
    Gaussian,
    /// Samples supplied directly, one per grid node.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
}

impl ProfileSpec {
    pub fn ground_state(center: f64) -> Self {
        ProfileSpec {
            kind: ProfileKind::GroundState,
            amplitude: 1.0,
            width: GROUND_STATE_WIDTH,
            center,
        }
    }

    pub fn gaussian(amplitude: f64, width: f64, center: f64) -> Self {
        ProfileSpec {
            kind: ProfileKind::Gaussian,
            amplitude,
            width,
            center,
        }
    }

    /// Samples the profile; `p` is only used by the ground state.
    pub fn build(&self, grid: &Arc<Grid>, p: f64) -> Result<Field> {
        match &self.kind {
            ProfileKind::GroundState => {
                let q = ground_state(p, grid, self.center)?;
                if self.amplitude == 1.0 {
                    Ok(q)
                } else {
                    q.map(|v| self.amplitude * v)
                }
            }
            ProfileKind::Gaussian => gaussian(grid, self.amplitude, self.width, self.center),
            ProfileKind::Custom(values) => Field::new(grid.clone(), values.clone()),
        }
    }
}

fn check_margin(grid: &Grid, width: f64, center: f64) -> Result<()> {
    let half = 0.5 * grid.length();
    let margin = MARGIN_WIDTHS * width;
    if !center.is_finite() || center < -half + margin || center > half - margin {
        return Err(Error::InvalidProfile(format!(
            "center {center} must lie in [{}, {}] ({MARGIN_WIDTHS} widths from the edges)",
            -half + margin,
            half - margin
        )));
    }
    Ok(())
}

/// `ln cosh(y)` without overflow.
fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Value of `Q(x) = ((p+1) / (2 cosh^2((p-1) x / 2)))^(1/(p-1))`.
pub fn ground_state_value(p: f64, x: f64) -> f64 {
    let y = 0.5 * (p - 1.0) * x;
    (((0.5 * (p + 1.0)).ln() - 2.0 * ln_cosh(y)) / (p - 1.0)).exp()
}

/// Samples `Q(x - center)`, the profile of the speed-one focusing soliton.
pub fn ground_state(p: f64, grid: &Arc<Grid>, center: f64) -> Result<Field> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParams(format!("p must be finite and > 1, got {p}")));
    }
    check_margin(grid, GROUND_STATE_WIDTH, center)?;
    Field::from_fn(grid.clone(), |x| ground_state_value(p, x - center))
}

/// `amplitude * exp(-(x - center)^2 / (2 width^2))`.
pub fn gaussian(grid: &Arc<Grid>, amplitude: f64, width: f64, center: f64) -> Result<Field> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidProfile(format!("width must be positive, got {width}")));
    }
    if !amplitude.is_finite() {
        return Err(Error::InvalidProfile(format!("amplitude must be finite, got {amplitude}")));
    }
    check_margin(grid, width, center)?;
    Field::from_fn(grid.clone(), |x| {
        let s = (x - center) / width;
        amplitude * (-0.5 * s * s).exp()
    })
}

/// L2 norm of `q'' - q + q^p`, the residual of the traveling-wave ODE
/// satisfied by the ground state.
pub fn traveling_wave_residual(q: &Field, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParams(format!("p must be finite and > 1, got {p}")));
    }
    if let Some(j) = q.values().iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidProfile(format!(
            "residual needs a nonnegative profile, found {} at index {j}",
            q.values()[j]
        )));
    }
    let q2 = spectral_derivative(q, 2)?;
    let residual = q2.zip_with(q, |d2, v| d2 - v + v.powf(p))?;
    let squared = residual.map(|r| r * r)?;
    Ok(integrate(&squared).sqrt())
}
