//! gKdV right-hand side and the ETDRK4 stepper.
//!
//! In Fourier space the equation reads `v_t = i k^3 v + N(v)` with
//! `N(v) = sigma * i k * F[|u|^(p-1) u]`. The linear part is propagated by
//! `exp(i k^3 dt)` exactly; the nonlinear part enters through the
//! Cox-Matthews / Kassam-Trefethen fourth-order exponential scheme.

use std::f64::consts::PI;
use std::ops::ControlFlow;
use std::sync::Arc;

use num_complex::Complex64;

use crate::grid::{spectral_derivative, Field, Grid};
use crate::{Error, Result};

/// Sign in front of the nonlinear flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// `sigma = +1`
    Defocusing,
    /// `sigma = -1`
    Focusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    sign: Sign,
}

impl ModelParams {
    pub fn new(p: f64, sign: Sign) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParams(format!("p must be finite and > 1, got {p}")));
        }
        Ok(ModelParams { p, sign })
    }

    pub fn defocusing(p: f64) -> Result<Self> {
        Self::new(p, Sign::Defocusing)
    }

    pub fn focusing(p: f64) -> Result<Self> {
        Self::new(p, Sign::Focusing)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn sigma(&self) -> f64 {
        self.sign.value()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub time: f64,
    pub field: Field,
}

impl FieldState {
    pub fn new(time: f64, field: Field) -> Self {
        FieldState { time, field }
    }
}

/// `sigma * sign(u) * |u|^p` written into `out`. Returns the first non-finite index.
fn flux_into(values: &[f64], params: &ModelParams, out: &mut [f64]) -> std::result::Result<(), usize> {
    let sigma = params.sigma();
    let p = params.p();
    for (j, (&u, o)) in values.iter().zip(out.iter_mut()).enumerate() {
        let f = sigma * u.signum() * u.abs().powf(p);
        // signum(0) = 1 but |0|^p = 0, so zero stays zero
        if !f.is_finite() {
            return Err(j);
        }
        *o = f;
    }
    Ok(())
}

/// Pointwise flux density `sigma * |u|^(p-1) u` (before the outer derivative).
pub fn nonlinear_flux(u: &Field, params: &ModelParams) -> Result<Field> {
    let mut out = vec![0.0; u.values().len()];
    flux_into(u.values(), params, &mut out).map_err(|index| Error::NonFinite { index })?;
    Field::new(u.grid().clone(), out)
}

/// Keep-mask for the 2/3 rule: modes with `|m| > N/3` are zeroed.
fn dealias_mask(grid: &Grid) -> Vec<bool> {
    let n = grid.n_points();
    let cutoff = n / 3;
    (0..n)
        .map(|m| {
            let idx = if m < n / 2 { m } else { n - m };
            idx <= cutoff && m != n / 2
        })
        .collect()
}

/// The flux is sampled on a grid this many times finer than the solution grid
/// before being truncated back, which keeps the quadrature error of the
/// non-smooth `|u|^(p-1) u` out of the conserved quantities.
pub const FLUX_OVERSAMPLING: usize = 4;

/// Fourier coefficients (on the coarse mode set) of `sigma * |u|^(p-1) u`
/// for the field with coefficients `v`, evaluated on the oversampled grid
/// `fine`. Returns the first non-finite fine-grid index on overflow.
fn flux_spectrum(
    grid: &Grid,
    fine: &Grid,
    v: &[Complex64],
    params: &ModelParams,
) -> std::result::Result<Vec<Complex64>, usize> {
    let n = grid.n_points();
    let big = fine.n_points();
    let half = n / 2;
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    padded[..half].copy_from_slice(&v[..half]);
    for m in half + 1..n {
        padded[big - (n - m)] = v[m];
    }
    padded[half] = v[half] * 0.5;
    padded[big - half] = v[half] * 0.5;
    let ratio = big as f64 / n as f64;
    let u: Vec<f64> = fine.inverse(padded).into_iter().map(|x| x * ratio).collect();
    let mut flux = vec![0.0; big];
    flux_into(&u, params, &mut flux)?;
    let fine_spectrum = fine.forward(&flux);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..half {
        out[m] = fine_spectrum[m] / ratio;
    }
    for m in half + 1..n {
        out[m] = fine_spectrum[big - (n - m)] / ratio;
    }
    Ok(out)
}

fn oversampled(grid: &Grid) -> Result<Grid> {
    Grid::new(grid.n_points() * FLUX_OVERSAMPLING, grid.length())
}

/// Semi-discrete time derivative `-u_xxx + sigma (|u|^(p-1) u)_x`, with the
/// flux dealiased before differentiation.
pub fn rhs(state: &FieldState, params: &ModelParams) -> Result<Field> {
    let u = &state.field;
    let grid = u.grid();
    let fine = oversampled(grid)?;
    let linear = spectral_derivative(u, 3)?;
    let mask = dealias_mask(grid);
    let d1 = grid.derivative_multiplier(1)?;
    let mut spectrum = flux_spectrum(grid, &fine, &grid.forward(u.values()), params)
        .map_err(|_| Error::BlowUp { time: state.time })?;
    for ((c, &keep), m) in spectrum.iter_mut().zip(&mask).zip(&d1) {
        *c = if keep { *c * m } else { Complex64::new(0.0, 0.0) };
    }
    let nonlinear = grid.inverse(spectrum);
    let values = linear
        .values()
        .iter()
        .zip(&nonlinear)
        .map(|(l, n)| -l + n)
        .collect();
    Field::new(grid.clone(), values)
}

/// Number of contour points used to evaluate the ETDRK4 coefficients.
const CONTOUR_POINTS: usize = 64;

/// Precomputed ETDRK4 stepper for a fixed grid, model and time step.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Arc<Grid>,
    fine: Arc<Grid>,
    params: ModelParams,
    dt: f64,
    linear_only: bool,
    propagator: Vec<Complex64>,
    half_propagator: Vec<Complex64>,
    half_weight: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    flux_multiplier: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: Arc<Grid>, params: ModelParams, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(format!("dt must be positive, got {dt}")));
        }
        // linear symbol -(i k)^3 = i k^3; Nyquist entry is zero
        let symbol: Vec<Complex64> = grid.derivative_multiplier(3)?.iter().map(|m| -m).collect();
        let d1 = grid.derivative_multiplier(1)?;
        let mask = dealias_mask(&grid);
        let flux_multiplier = d1
            .iter()
            .zip(&mask)
            .map(|(&m, &keep)| if keep { m } else { Complex64::new(0.0, 0.0) })
            .collect();

        let n = symbol.len();
        let mut propagator = Vec::with_capacity(n);
        let mut half_propagator = Vec::with_capacity(n);
        let mut half_weight = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        let mut f3 = Vec::with_capacity(n);
        for &l in &symbol {
            let z = l * dt;
            propagator.push(z.exp());
            half_propagator.push((z * 0.5).exp());
            let c = EtdCoefficients::contour_mean(z);
            half_weight.push(c.half * dt);
            f1.push(c.f1 * dt);
            f2.push(c.f2 * dt);
            f3.push(c.f3 * dt);
        }
        Ok(Stepper {
            fine: Arc::new(oversampled(&grid)?),
            grid,
            params,
            dt,
            linear_only: false,
            propagator,
            half_propagator,
            half_weight,
            f1,
            f2,
            f3,
            flux_multiplier,
        })
    }

    /// Switches the nonlinear term off; used to test the linear propagator.
    pub fn linear_only(mut self) -> Self {
        self.linear_only = true;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Exact linear propagator factor `exp(i k^3 dt)` per mode.
    pub fn propagator(&self) -> &[Complex64] {
        &self.propagator
    }

    fn nonlinear(&self, v: &[Complex64], time: f64) -> Result<Vec<Complex64>> {
        if self.linear_only {
            return Ok(vec![Complex64::new(0.0, 0.0); v.len()]);
        }
        let mut spectrum = flux_spectrum(&self.grid, &self.fine, v, &self.params)
            .map_err(|_| Error::BlowUp { time })?;
        for (c, m) in spectrum.iter_mut().zip(&self.flux_multiplier) {
            *c *= m;
        }
        Ok(spectrum)
    }

    /// One ETDRK4 step on Fourier coefficients; `time` is used for error reports.
    pub fn step_spectral(&self, v: &[Complex64], time: f64) -> Result<Vec<Complex64>> {
        let nv = self.nonlinear(v, time)?;
        let a: Vec<Complex64> = (0..v.len())
            .map(|m| self.half_propagator[m] * v[m] + self.half_weight[m] * nv[m])
            .collect();
        let na = self.nonlinear(&a, time)?;
        let b: Vec<Complex64> = (0..v.len())
            .map(|m| self.half_propagator[m] * v[m] + self.half_weight[m] * na[m])
            .collect();
        let nb = self.nonlinear(&b, time)?;
        let c: Vec<Complex64> = (0..v.len())
            .map(|m| self.half_propagator[m] * a[m] + self.half_weight[m] * (2.0 * nb[m] - nv[m]))
            .collect();
        let nc = self.nonlinear(&c, time)?;
        let next: Vec<Complex64> = (0..v.len())
            .map(|m| {
                self.propagator[m] * v[m]
                    + self.f1[m] * nv[m]
                    + self.f2[m] * 2.0 * (na[m] + nb[m])
                    + self.f3[m] * nc[m]
            })
            .collect();
        if next.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp { time: time + self.dt });
        }
        Ok(next)
    }

    fn check_grid(&self, state: &FieldState) -> Result<()> {
        if **state.field.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn step(&self, state: &FieldState) -> Result<FieldState> {
        self.check_grid(state)?;
        let v = self.grid.forward(state.field.values());
        let next = self.step_spectral(&v, state.time)?;
        let field = Field::new(self.grid.clone(), self.grid.inverse(next))
            .map_err(|_| Error::BlowUp { time: state.time + self.dt })?;
        Ok(FieldState::new(state.time + self.dt, field))
    }

    /// Advances `initial` to `t_final`, calling `observer` on the initial state
    /// and after every `record_stride` steps. The observer may abort the run
    /// by returning `ControlFlow::Break(reason)`.
    pub fn evolve<F>(
        &self,
        initial: &FieldState,
        t_final: f64,
        record_stride: usize,
        mut observer: F,
    ) -> Result<FieldState>
    where
        F: FnMut(&FieldState) -> ControlFlow<String>,
    {
        self.check_grid(initial)?;
        let n_steps = step_count(initial.time, t_final, self.dt)?;
        if record_stride == 0 {
            return Err(Error::InvalidTimeStep("record_stride must be at least 1".into()));
        }
        if let ControlFlow::Break(reason) = observer(initial) {
            return Err(Error::Aborted { time: initial.time, reason });
        }
        if n_steps == 0 {
            return Ok(initial.clone());
        }
        let t0 = initial.time;
        let mut v = self.grid.forward(initial.field.values());
        let mut state = initial.clone();
        for i in 1..=n_steps {
            let t_prev = t0 + (i - 1) as f64 * self.dt;
            v = self.step_spectral(&v, t_prev)?;
            let time = t0 + i as f64 * self.dt;
            if i % record_stride == 0 || i == n_steps {
                let field = Field::new(self.grid.clone(), self.grid.inverse(v.clone()))
                    .map_err(|_| Error::BlowUp { time })?;
                state = FieldState::new(time, field);
                if i % record_stride == 0 {
                    if let ControlFlow::Break(reason) = observer(&state) {
                        return Err(Error::Aborted { time, reason });
                    }
                }
            }
        }
        Ok(state)
    }
}

/// Number of steps of size `dt` from `t0` to `t_final`; the span must be an
/// integer multiple of `dt` (relative tolerance 1e-9).
pub fn step_count(t0: f64, t_final: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(format!("dt must be positive, got {dt}")));
    }
    let span = t_final - t0;
    if !span.is_finite() || span < 0.0 {
        return Err(Error::InvalidTimeStep(format!(
            "t_final {t_final} precedes the initial time {t0}"
        )));
    }
    let steps = (span / dt).round();
    if (steps * dt - span).abs() > 1e-9 * span.max(dt) {
        return Err(Error::InvalidTimeStep(format!(
            "span {span} is not a multiple of dt = {dt}"
        )));
    }
    Ok(steps as usize)
}

/// One ETDRK4 step from `state`; builds the coefficient tables on every call.
pub fn step(state: &FieldState, dt: f64, params: &ModelParams) -> Result<FieldState> {
    Stepper::new(state.field.grid().clone(), *params, dt)?.step(state)
}

/// Runs [`Stepper::evolve`] with a freshly built stepper.
pub fn evolve<F>(
    initial: &FieldState,
    t_final: f64,
    dt: f64,
    params: &ModelParams,
    record_stride: usize,
    observer: F,
) -> Result<FieldState>
where
    F: FnMut(&FieldState) -> ControlFlow<String>,
{
    Stepper::new(initial.field.grid().clone(), *params, dt)?.evolve(initial, t_final, record_stride, observer)
}

/// ETDRK4 weights divided by `dt`, as functions of `z = L dt`.
struct EtdCoefficients {
    half: Complex64,
    f1: Complex64,
    f2: Complex64,
    f3: Complex64,
}

impl EtdCoefficients {
    /// Means over a unit circle around `z`, which avoids the cancellation
    /// of the closed forms near `z = 0`.
    fn contour_mean(z: Complex64) -> Self {
        let mut acc = EtdCoefficients {
            half: Complex64::new(0.0, 0.0),
            f1: Complex64::new(0.0, 0.0),
            f2: Complex64::new(0.0, 0.0),
            f3: Complex64::new(0.0, 0.0),
        };
        for j in 0..CONTOUR_POINTS {
            let theta = PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64 * 2.0;
            let r = z + Complex64::from_polar(1.0, theta);
            let er = r.exp();
            let r3 = r * r * r;
            acc.half += ((r * 0.5).exp() - 1.0) / r;
            acc.f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
            acc.f2 += (2.0 + r + er * (r - 2.0)) / r3;
            acc.f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
        }
        let scale = 1.0 / CONTOUR_POINTS as f64;
        EtdCoefficients {
            half: acc.half * scale,
            f1: acc.f1 * scale,
            f2: acc.f2 * scale,
            f3: acc.f3 * scale,
        }
    }
}
