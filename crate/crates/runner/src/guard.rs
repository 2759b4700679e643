//! Wrap-around guard: mass near the periodic seam means the run no longer
//! represents a whole-line solution.

use gkdv_core::diagnostics::DiagnosticsRecord;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardViolation {
    pub time: f64,
    pub boundary_mass: f64,
    pub limit: f64,
}

impl GuardViolation {
    pub fn describe(&self) -> String {
        format!(
            "wrap guard: boundary mass {:.6e} exceeds {:.6e} at t = {}",
            self.boundary_mass, self.limit, self.time
        )
    }
}

/// Fails when the edge bands hold more than `edge_mass_tol * initial_mass`.
pub fn wrap_guard(
    record: &DiagnosticsRecord,
    config: &ExperimentConfig,
    initial_mass: f64,
) -> Result<(), GuardViolation> {
    let limit = config.edge_mass_tol * initial_mass;
    if record.boundary_mass > limit {
        Err(GuardViolation { time: record.time, boundary_mass: record.boundary_mass, limit })
    } else {
        Ok(())
    }
}
