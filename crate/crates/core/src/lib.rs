//! Numerical laboratory for the generalized Korteweg-de Vries equation
//!
//! ```text
//! u_t + u_xxx = sigma * (|u|^(p-1) u)_x
//! ```
//!
//! on a large periodic box. `sigma = +1` is the defocusing flow and
//! `sigma = -1` the focusing one, which carries the speed-one soliton `Q(x - t)`.
//!
//! The crate is split into:
//! * [`grid`]: uniform periodic mesh, Fourier differentiation and quadrature.
//! * [`dynamics`]: the semi-discrete right-hand side and a fourth-order
//!   exponential time integrator (ETDRK4).
//! * [`initial`]: ground state, Gaussian and user-supplied profiles.
//! * [`diagnostics`]: mass, energy, centers, second moment, virial identity,
//!   monotonicity gap and dyadic tail bounds.

pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod grid;
pub mod initial;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
