use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {got} samples but the grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("unsupported derivative order {0} (expected 1, 2 or 3)")]
    UnsupportedOrder(u32),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid time stepping: {0}")]
    InvalidTimeStep(String),
    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("run aborted by observer at t = {time}: {reason}")]
    Aborted { time: f64, reason: String },
    #[error("center of mass undefined: field has zero mass")]
    ZeroMass,
    #[error("center of energy undefined: energy {energy:e} is degenerate")]
    DegenerateEnergy { energy: f64 },
    #[error("not enough samples: {0}")]
    TooFewSamples(String),
    #[error("mass is not conserved across records (relative drift {0:e})")]
    NonConservedMass(f64),
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("fields live on different grids")]
    GridMismatch,
}
