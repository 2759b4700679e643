//! Experiment orchestration for the gKdV laboratory: configuration parsing,
//! named scenarios, the wrap-around guard and result emission.

pub mod config;
pub mod emit;
pub mod guard;
pub mod scenario;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use emit::{csv_text, emit, parse_csv, summary_text, CSV_HEADER};
pub use guard::{wrap_guard, GuardViolation};
pub use scenario::{prepare, run_scenario, RunReport, Scenario, Status};

/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for runtime aborts and output failures.
pub const EXIT_RUNTIME: i32 = 3;
