//! Conserved functionals, centers, moments and the virial identity.
//!
//! Densities: `rho = u^2` and `e = u_x^2 / 2 + sigma |u|^(p+1) / (p+1)`.
//! Centers use raw grid coordinates; the wrap guard in the runner keeps mass
//! away from the periodic seam so this matches the whole-line functionals.

mod gap;
mod tails;

pub use gap::{tao_gap, GapEstimate};
pub use tails::{dyadic_bound, tail_mass, BoundOutcome, TailProfile};

use crate::dynamics::{FieldState, ModelParams};
use crate::grid::{spectral_derivative, Field};
use crate::{Error, Result};

/// Relative size below which the energy is treated as zero.
pub const DEGENERATE_ENERGY_RTOL: f64 = 1e-12;

/// `M(u) = integral of u^2`.
pub fn mass(u: &Field) -> f64 {
    u.grid().integrate_values(&squares(u.values()))
}

fn squares(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v * v).collect()
}

/// Pointwise energy density `u_x^2 / 2 + sigma |u|^(p+1) / (p+1)`.
pub fn energy_density(u: &Field, params: &ModelParams) -> Result<Vec<f64>> {
    let ux = spectral_derivative(u, 1)?;
    let q = params.p() + 1.0;
    let sigma = params.sigma();
    Ok(ux
        .values()
        .iter()
        .zip(u.values())
        .map(|(d, v)| 0.5 * d * d + sigma * v.abs().powf(q) / q)
        .collect())
}

/// Integral of the unsigned density `u_x^2 / 2 + |u|^(p+1) / (p+1)`; the scale
/// against which a signed energy is judged degenerate.
fn energy_scale(u: &Field, params: &ModelParams) -> Result<f64> {
    let ux = spectral_derivative(u, 1)?;
    let q = params.p() + 1.0;
    let density: Vec<f64> = ux
        .values()
        .iter()
        .zip(u.values())
        .map(|(d, v)| 0.5 * d * d + v.abs().powf(q) / q)
        .collect();
    Ok(u.grid().integrate_values(&density))
}

/// `E(u)`, with the potential term signed by `sigma`.
pub fn energy(u: &Field, params: &ModelParams) -> Result<f64> {
    Ok(u.grid().integrate_values(&energy_density(u, params)?))
}

fn first_moment(u: &Field, density: &[f64]) -> f64 {
    let weighted: Vec<f64> = u
        .grid()
        .coordinates()
        .iter()
        .zip(density)
        .map(|(x, d)| x * d)
        .collect();
    u.grid().integrate_values(&weighted)
}

/// `<x>_M = (1/M) integral of x u^2`.
pub fn center_of_mass(u: &Field) -> Result<f64> {
    let rho = squares(u.values());
    let m = u.grid().integrate_values(&rho);
    if m <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(first_moment(u, &rho) / m)
}

/// `<x>_E = (1/E) integral of x e`, using the signed density.
pub fn center_of_energy(u: &Field, params: &ModelParams) -> Result<f64> {
    let e = energy_density(u, params)?;
    let total = u.grid().integrate_values(&e);
    let scale = energy_scale(u, params)?;
    if scale == 0.0 || total.abs() <= DEGENERATE_ENERGY_RTOL * scale {
        return Err(Error::DegenerateEnergy { energy: total });
    }
    Ok(first_moment(u, &e) / total)
}

/// `integral of (x - a)^2 u^2`.
pub fn second_moment(u: &Field, a: f64) -> f64 {
    let weighted: Vec<f64> = u
        .grid()
        .coordinates()
        .iter()
        .zip(u.values())
        .map(|(x, v)| (x - a) * (x - a) * v * v)
        .collect();
    u.grid().integrate_values(&weighted)
}

/// The two pieces of `dV/dt` for `V = integral of (x - <x>_M)^2 u^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialTerms {
    /// `-12 E (<x>_E - <x>_M)`, computed as `-12 integral of (x - <x>_M) e`.
    pub gap_term: f64,
    /// `-sigma (4p - 12)/(p + 1) integral of |u|^(p+1) (x - <x>_M)`.
    pub flux_term: f64,
}

impl VirialTerms {
    pub fn total(&self) -> f64 {
        self.gap_term + self.flux_term
    }
}

pub fn virial_terms(u: &Field, params: &ModelParams) -> Result<VirialTerms> {
    let center = center_of_mass(u)?;
    let e = energy_density(u, params)?;
    let p = params.p();
    let grid = u.grid();
    let (mut weighted_e, mut weighted_pot) = (0.0, 0.0);
    for ((x, d), v) in grid.coordinates().iter().zip(&e).zip(u.values()) {
        let w = x - center;
        weighted_e += w * d;
        weighted_pot += w * v.abs().powf(p + 1.0);
    }
    let dx = grid.dx();
    let coefficient = (4.0 * p - 12.0) / (p + 1.0);
    Ok(VirialTerms {
        gap_term: -12.0 * dx * weighted_e,
        flux_term: -params.sigma() * coefficient * dx * weighted_pot,
    })
}

/// Right-hand side of the virial identity for `d/dt integral of (x - <x>_M)^2 u^2`.
pub fn virial_rhs(u: &Field, params: &ModelParams) -> Result<f64> {
    virial_terms(u, params).map(|t| t.total())
}

/// Mass carried by nodes within `delta_edge` of either end of the domain.
pub fn boundary_mass(u: &Field, delta_edge: f64) -> f64 {
    let half = 0.5 * u.grid().length();
    let edge: Vec<f64> = u
        .grid()
        .coordinates()
        .iter()
        .zip(u.values())
        .map(|(&x, &v)| {
            if x < -half + delta_edge || x >= half - delta_edge {
                v * v
            } else {
                0.0
            }
        })
        .collect();
    u.grid().integrate_values(&edge)
}

/// All tracked functionals at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub mass: f64,
    pub energy: f64,
    pub x_mass: f64,
    pub x_energy: f64,
    pub second_moment: f64,
    pub virial_rhs: f64,
    pub boundary_mass: f64,
}

pub fn record(state: &FieldState, params: &ModelParams, delta_edge: f64) -> Result<DiagnosticsRecord> {
    let u = &state.field;
    let m = mass(u);
    let x_mass = center_of_mass(u)?;
    let x_energy = center_of_energy(u, params)?;
    Ok(DiagnosticsRecord {
        time: state.time,
        mass: m,
        energy: energy(u, params)?,
        x_mass,
        x_energy,
        second_moment: second_moment(u, x_mass),
        virial_rhs: virial_rhs(u, params)?,
        boundary_mass: boundary_mass(u, delta_edge),
    })
}
