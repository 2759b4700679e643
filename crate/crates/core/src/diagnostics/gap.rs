//! Sliding-window estimate of `d<x>_M/dt - d<x>_E/dt`.

use super::tails::least_squares_slope;
use super::DiagnosticsRecord;
use crate::{Error, Result};

/// Relative mass drift tolerated across the records fed to [`tao_gap`].
pub const MASS_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    /// `(start, end)` times of the window.
    pub window: (f64, f64),
    pub slope_mass: f64,
    pub slope_energy: f64,
    /// `slope_mass - slope_energy`.
    pub gap: f64,
    /// Minimum gap over this and all earlier windows.
    pub empirical_c: f64,
}

/// Least-squares slopes of both centers over every window of length `window`
/// that starts at a record and fits inside the recorded span.
pub fn tao_gap(records: &[DiagnosticsRecord], window: f64) -> Result<Vec<GapEstimate>> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::InvalidTimeStep(format!("window must be positive, got {window}")));
    }
    if records.len() < 4 {
        return Err(Error::TooFewSamples(format!(
            "need at least 4 records, got {}",
            records.len()
        )));
    }
    let m0 = records[0].mass;
    let drift = records
        .iter()
        .map(|r| ((r.mass - m0) / m0).abs())
        .fold(0.0, f64::max);
    if drift.is_nan() || drift > MASS_DRIFT_TOL {
        return Err(Error::NonConservedMass(drift));
    }

    let t_last = records[records.len() - 1].time;
    let slack = 1e-9 * window;
    let mut estimates = Vec::new();
    let mut running_min = f64::INFINITY;
    for (i, start) in records.iter().enumerate() {
        let end = start.time + window;
        if end > t_last + slack {
            break;
        }
        let span: Vec<&DiagnosticsRecord> = records[i..]
            .iter()
            .take_while(|r| r.time <= end + slack)
            .collect();
        if span.len() < 4 {
            return Err(Error::TooFewSamples(format!(
                "window [{}, {end}] holds {} records, need 4",
                start.time,
                span.len()
            )));
        }
        let slope = |f: fn(&DiagnosticsRecord) -> f64| {
            let points: Vec<(f64, f64)> = span.iter().map(|r| (r.time - start.time, f(r))).collect();
            least_squares_slope(&points).expect("window spans distinct times")
        };
        let slope_mass = slope(|r| r.x_mass);
        let slope_energy = slope(|r| r.x_energy);
        let gap = slope_mass - slope_energy;
        running_min = running_min.min(gap);
        estimates.push(GapEstimate {
            window: (start.time, end),
            slope_mass,
            slope_energy,
            gap,
            empirical_c: running_min,
        });
    }
    if estimates.is_empty() {
        return Err(Error::TooFewSamples(format!(
            "records span {} which is shorter than the window {window}",
            t_last - records[0].time
        )));
    }
    Ok(estimates)
}
