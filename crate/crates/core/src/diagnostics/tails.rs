//! Tail masses on dyadic radii and the shell-by-shell second-moment bound.

use crate::grid::Field;
use crate::{Error, Result};

/// Shells holding less than this fraction of the mass are ignored by the decay fit.
pub const TAIL_FLOOR: f64 = 1e-12;

/// Mass of `u` outside `[a - R, a + R]`.
///
/// The excluded window is integrated exactly on the trigonometric interpolant
/// of `u^2`, so the result is spectrally accurate even when `a +- R` falls
/// between nodes.
pub fn tail_mass(u: &Field, a: f64, radius: f64) -> f64 {
    let grid = u.grid();
    let half = 0.5 * grid.length();
    let radius = radius.max(0.0);
    let rho: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let total = grid.integrate_values(&rho);
    if radius == 0.0 {
        return total;
    }
    if a - radius <= -half && a + radius >= half {
        return 0.0;
    }
    (total - grid.integrate_interpolant(&rho, a - radius, a + radius)).clamp(0.0, total)
}

/// Tail masses `T_k` outside the dyadic radii `R_k = 2^k`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProfile {
    center: f64,
    tail_masses: Vec<f64>,
}

impl TailProfile {
    /// Ladder depth for a domain of length `L`: `K = floor(log2(L / 2))`.
    pub fn ladder_depth(length: f64) -> usize {
        (0.5 * length).log2().floor().max(0.0) as usize
    }

    /// Measures `T_k` about `center` for `k = 0..=K`. Round-off in the
    /// interpolant is clipped so the sequence is nonincreasing.
    pub fn measure(u: &Field, center: f64) -> Self {
        let depth = Self::ladder_depth(u.grid().length());
        let mut running = f64::INFINITY;
        let tail_masses = (0..=depth)
            .map(|k| {
                running = running.min(tail_mass(u, center, 2f64.powi(k as i32)));
                running
            })
            .collect();
        TailProfile { center, tail_masses }
    }

    /// Builds a profile from given tail masses (e.g. a hypothesised decay law).
    pub fn from_tail_masses(center: f64, tail_masses: Vec<f64>) -> Result<Self> {
        if tail_masses.is_empty() {
            return Err(Error::TooFewSamples("tail profile needs at least one radius".into()));
        }
        if tail_masses.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidProfile("tail masses must be finite and nonnegative".into()));
        }
        if tail_masses.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidProfile("tail masses must be nonincreasing".into()));
        }
        Ok(TailProfile { center, tail_masses })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn tail_masses(&self) -> &[f64] {
        &self.tail_masses
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.tail_masses.len()).map(|k| 2f64.powi(k as i32)).collect()
    }

    /// Largest ladder index `K`.
    pub fn depth(&self) -> usize {
        self.tail_masses.len() - 1
    }

    /// Exponent `s` in `T_k ~ 2^(-s k)`, from a least-squares fit of
    /// `log2 T_k` against `k` over shells with `T_k > TAIL_FLOOR * mass`.
    /// `None` when fewer than two shells qualify.
    pub fn decay_exponent(&self, mass: f64) -> Option<f64> {
        let points: Vec<(f64, f64)> = self
            .tail_masses
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > TAIL_FLOOR * mass)
            .map(|(k, &t)| (k as f64, t.log2()))
            .collect();
        if points.len() < 2 {
            return None;
        }
        least_squares_slope(&points).map(|slope| -slope)
    }
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundOutcome {
    Finite(f64),
    /// The shell sum does not converge under the given decay hypothesis.
    Divergent,
}

impl BoundOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            BoundOutcome::Finite(v) => Some(*v),
            BoundOutcome::Divergent => None,
        }
    }
}

/// Shell-by-shell bound on the second moment about the profile center:
///
/// ```text
/// M + sum_k 4^(k+1) min(T_k, C 2^(-(2+eps) k))
/// ```
///
/// Shells beyond the measured ladder are summed in closed form from the decay
/// hypothesis. With `eps = 0` the hypothesis alone gives a divergent series;
/// the bound is then finite only when the measured `T_k` decay strictly faster
/// than `2^(-2k)`, in which case only the measured shells are summed.
pub fn dyadic_bound(profile: &TailProfile, mass: f64, epsilon: f64, c_decay: f64) -> Result<BoundOutcome> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::NegativeEpsilon(epsilon));
    }
    if !(c_decay.is_finite() && c_decay > 0.0) {
        return Err(Error::InvalidParams(format!("decay constant must be positive, got {c_decay}")));
    }
    let measured: f64 = profile
        .tail_masses
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let k = k as i32;
            let hypothesis = c_decay * 2f64.powf(-(2.0 + epsilon) * k as f64);
            4f64.powi(k + 1) * t.min(hypothesis)
        })
        .sum();
    if epsilon > 0.0 {
        // sum_{k > K} 4^(k+1) C 2^(-(2+eps)k) = 4 C 2^(-eps (K+1)) / (1 - 2^(-eps))
        let next = (profile.depth() + 1) as f64;
        let beyond = 4.0 * c_decay * 2f64.powf(-epsilon * next) / (1.0 - 2f64.powf(-epsilon));
        return Ok(BoundOutcome::Finite(mass + measured + beyond));
    }
    match profile.decay_exponent(mass) {
        Some(s) if s > 2.0 + 1e-9 => Ok(BoundOutcome::Finite(mass + measured)),
        _ => Ok(BoundOutcome::Divergent),
    }
}
