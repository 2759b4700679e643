//! Named experiments and their assertions.

use std::ops::ControlFlow;
use std::sync::Arc;

use gkdv_core::diagnostics::{
    dyadic_bound, record, tao_gap, virial_terms, BoundOutcome, DiagnosticsRecord, TailProfile,
    VirialTerms,
};
use gkdv_core::dynamics::{FieldState, ModelParams, Sign, Stepper};
use gkdv_core::grid::{make_grid, Field, Grid};
use gkdv_core::initial::{ground_state_value, traveling_wave_residual, ProfileKind, ProfileSpec};
use gkdv_core::Error;

use crate::config::{ConfigError, ExperimentConfig, InitialKind};
use crate::guard::wrap_guard;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    SolitonControl,
    VirialIdentity,
    TaoMonotonicity,
    SecondMomentGrowth,
    TailDecayProbe,
}

/// Records per window needed by the slope fits.
const MIN_WINDOW_RECORDS: f64 = 4.0;

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::SolitonControl,
        Scenario::VirialIdentity,
        Scenario::TaoMonotonicity,
        Scenario::SecondMomentGrowth,
        Scenario::TailDecayProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SolitonControl => "soliton_control",
            Scenario::VirialIdentity => "virial_identity",
            Scenario::TaoMonotonicity => "tao_monotonicity",
            Scenario::SecondMomentGrowth => "second_moment_growth",
            Scenario::TailDecayProbe => "tail_decay_probe",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// The statement each scenario probes.
    pub fn anchor(self) -> &'static str {
        match self {
            Scenario::SolitonControl => {
                "focusing traveling wave u(t,x) = Q(x - t); tracking error < 1e-4, \
                 profile residual < 1e-8, |d<x>_M/dt - d<x>_E/dt| < 1e-6"
            }
            Scenario::VirialIdentity => {
                "d/dt int (x-<x>_M)^2 u^2 = -12 E (<x>_E - <x>_M) - sigma (4p-12)/(p+1) int |u|^(p+1) (x-<x>_M); \
                 centered-difference residual < 1e-3 relative"
            }
            Scenario::TaoMonotonicity => {
                "defocusing, p >= sqrt(3): d<x>_M/dt - d<x>_E/dt > c(M,E) > 0; \
                 positive gap on every window and <x>_M - <x>_E strictly increasing"
            }
            Scenario::SecondMomentGrowth => {
                "defocusing, p >= sqrt(3): sup_t int (x-x(t))^2 u^2 = infinity; \
                 V(T) > 2 V(0) and dV/dt > 0 once the energy-gap term dominates"
            }
            Scenario::TailDecayProbe => {
                "int_{|x-x(t)|>R} u^2 <~ R^-(2+eps); dyadic shell bound over-estimates V at every record"
            }
        }
    }

    fn uses_gap(self) -> bool {
        matches!(
            self,
            Scenario::SolitonControl | Scenario::TaoMonotonicity | Scenario::SecondMomentGrowth
        )
    }

    /// Hypotheses each scenario needs; errors name the offending key.
    pub(crate) fn admits(self, config: &ExperimentConfig) -> Result<(), (&'static str, String)> {
        match self {
            Scenario::TaoMonotonicity | Scenario::SecondMomentGrowth => {
                if config.sign != Sign::Defocusing {
                    return Err(("model.sigma", format!("{} requires sigma = +1", self.name())));
                }
                if config.p < 3f64.sqrt() {
                    return Err(("model.p", format!("{} requires p >= sqrt(3), got {}", self.name(), config.p)));
                }
            }
            Scenario::SolitonControl => {
                if config.sign != Sign::Focusing {
                    return Err(("model.sigma", "soliton_control requires sigma = -1".into()));
                }
                if config.initial.kind != InitialKind::GroundState || config.initial.amplitude != 1.0 {
                    return Err(("initial.kind", "soliton_control launches the ground state with amplitude 1".into()));
                }
            }
            Scenario::VirialIdentity | Scenario::TailDecayProbe => {}
        }
        if self.uses_gap() {
            let spacing = config.dt * config.record_stride as f64;
            if config.window < (MIN_WINDOW_RECORDS - 1.0) * spacing * (1.0 - 1e-9) {
                return Err(("analysis.window", format!("window must hold 4 records, i.e. be at least {}", 3.0 * spacing)));
            }
            if config.window > config.t_final * (1.0 + 1e-9) {
                return Err(("analysis.window", "window is longer than the run".into()));
            }
        }
        Ok(())
    }
}

/// Grid, model and initial field ready to evolve.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: Arc<Grid>,
    pub params: ModelParams,
    pub initial: Field,
}

/// Builds the initial data; reads custom samples from disk.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, ConfigError> {
    let as_config = |e: Error| ConfigError { line: None, message: e.to_string() };
    let grid = make_grid(config.n_points, config.length).map_err(as_config)?;
    let params = config.params();
    let init = &config.initial;
    let kind = match init.kind {
        InitialKind::GroundState => ProfileKind::GroundState,
        InitialKind::Gaussian => ProfileKind::Gaussian,
        InitialKind::Custom => {
            let path = init.path.as_ref().expect("custom profiles carry a path");
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                line: None,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            let samples = text
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ConfigError {
                    line: None,
                    message: format!("bad sample in {}: {e}", path.display()),
                })?;
            ProfileKind::Custom(samples)
        }
    };
    let spec = ProfileSpec { kind, amplitude: init.amplitude, width: init.width, center: init.center };
    let initial = spec.build(&grid, config.p).map_err(as_config)?;
    Ok(Prepared { grid, params, initial })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Less,
    Greater,
    GreaterOrEqual,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::Greater => ">",
            Relation::GreaterOrEqual => ">=",
        }
    }

    fn holds(self, value: f64, limit: f64) -> bool {
        match self {
            Relation::Less => value < limit,
            Relation::Greater => value > limit,
            Relation::GreaterOrEqual => value >= limit,
        }
    }
}

/// One scenario check: `value relation limit`. NaN values fail.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: &'static str,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
}

impl Assertion {
    fn new(name: &'static str, value: f64, relation: Relation, limit: f64) -> Self {
        Assertion { name, value, relation, limit }
    }

    pub fn passed(&self) -> bool {
        self.relation.holds(self.value, self.limit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Passed,
    Failed,
    Aborted { time: f64, reason: String },
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::Failed => 1,
            Status::Aborted { .. } => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Passed => "pass",
            Status::Failed => "fail",
            Status::Aborted { .. } => "aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub records: Vec<DiagnosticsRecord>,
    pub assertions: Vec<Assertion>,
    /// Scenario-specific measurements, in emission order.
    pub extras: Vec<(String, f64)>,
    pub status: Status,
}

impl RunReport {
    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// Per-record data some scenarios need beyond the CSV columns.
#[derive(Default)]
struct Side {
    terms: Vec<VirialTerms>,
    bounds: Vec<f64>,
    last_profile: Option<TailProfile>,
}

/// Runs the configured scenario. Configuration problems found while
/// building the initial data are returned as errors; everything else,
/// including aborts, ends up in the report.
pub fn run_scenario(config: &ExperimentConfig) -> Result<RunReport, ConfigError> {
    let prepared = prepare(config)?;
    Ok(run_prepared(config, &prepared))
}

pub fn run_prepared(config: &ExperimentConfig, prepared: &Prepared) -> RunReport {
    let scenario = config.scenario;
    let params = prepared.params;
    let mut records = Vec::new();
    let mut side = Side::default();
    let initial_mass = gkdv_core::diagnostics::mass(&prepared.initial);

    let stepper = match Stepper::new(prepared.grid.clone(), params, config.dt) {
        Ok(s) => s,
        Err(e) => return aborted(scenario, records, 0.0, e.to_string()),
    };
    let initial = FieldState::new(0.0, prepared.initial.clone());
    let outcome = stepper.evolve(&initial, config.t_final, config.record_stride, |state| {
        let rec = match record(state, &params, config.delta_edge) {
            Ok(r) => r,
            Err(e) => return ControlFlow::Break(format!("diagnostics: {e}")),
        };
        if let Err(v) = wrap_guard(&rec, config, initial_mass) {
            return ControlFlow::Break(v.describe());
        }
        if let Err(e) = observe_side(scenario, config, state, &rec, &params, &mut side) {
            return ControlFlow::Break(format!("diagnostics: {e}"));
        }
        records.push(rec);
        ControlFlow::Continue(())
    });
    let final_state = match outcome {
        Ok(s) => s,
        Err(Error::Aborted { time, reason }) => return aborted(scenario, records, time, reason),
        Err(Error::BlowUp { time }) => return aborted(scenario, records, time, "blow-up: non-finite field".into()),
        Err(e) => return aborted(scenario, records, 0.0, e.to_string()),
    };

    let mut extras = conservation_extras(&records);
    let assertions = match scenario {
        Scenario::SolitonControl => soliton_checks(config, prepared, &final_state, &records, &mut extras),
        Scenario::VirialIdentity => vec![virial_check(config, &records, &mut extras)],
        Scenario::TaoMonotonicity => monotonicity_checks(config, &records, &mut extras),
        Scenario::SecondMomentGrowth => growth_checks(&records, &side.terms, &mut extras),
        Scenario::TailDecayProbe => tail_checks(&records, &side, &mut extras),
    };
    let status = if assertions.iter().all(Assertion::passed) { Status::Passed } else { Status::Failed };
    RunReport { scenario, records, assertions, extras, status }
}

fn aborted(scenario: Scenario, records: Vec<DiagnosticsRecord>, time: f64, reason: String) -> RunReport {
    let extras = conservation_extras(&records);
    RunReport { scenario, records, assertions: Vec::new(), extras, status: Status::Aborted { time, reason } }
}

fn observe_side(
    scenario: Scenario,
    config: &ExperimentConfig,
    state: &FieldState,
    rec: &DiagnosticsRecord,
    params: &ModelParams,
    side: &mut Side,
) -> Result<(), Error> {
    match scenario {
        Scenario::SecondMomentGrowth => side.terms.push(virial_terms(&state.field, params)?),
        Scenario::TailDecayProbe => {
            let profile = TailProfile::measure(&state.field, rec.x_mass);
            let bound = match dyadic_bound(&profile, rec.mass, config.epsilon, decay_constant(&profile, config.epsilon))? {
                BoundOutcome::Finite(b) => b,
                BoundOutcome::Divergent => f64::INFINITY,
            };
            side.bounds.push(bound);
            side.last_profile = Some(profile);
        }
        _ => {}
    }
    Ok(())
}

/// Smallest `C` with `T_k <= C 2^(-(2+eps) k)` on every measured shell.
pub fn decay_constant(profile: &TailProfile, epsilon: f64) -> f64 {
    let c = profile
        .tail_masses()
        .iter()
        .enumerate()
        .map(|(k, t)| t * 2f64.powf((2.0 + epsilon) * k as f64))
        .fold(0.0, f64::max);
    if c > 0.0 {
        c
    } else {
        f64::MIN_POSITIVE
    }
}

fn conservation_extras(records: &[DiagnosticsRecord]) -> Vec<(String, f64)> {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Vec::new();
    };
    let drift = |f: fn(&DiagnosticsRecord) -> f64| {
        records.iter().map(|r| ((f(r) - f(first)) / f(first)).abs()).fold(0.0, f64::max)
    };
    vec![
        ("last_record_time".into(), last.time),
        ("max_mass_drift".into(), drift(|r| r.mass)),
        ("max_energy_drift".into(), drift(|r| r.energy)),
        ("max_boundary_mass".into(), records.iter().map(|r| r.boundary_mass).fold(0.0, f64::max)),
    ]
}

/// Largest `|gap|` and the final `empirical_c`, or NaN when slopes cannot be fitted.
fn gap_extremes(records: &[DiagnosticsRecord], window: f64, extras: &mut Vec<(String, f64)>) -> (f64, f64, f64) {
    match tao_gap(records, window) {
        Ok(est) if !est.is_empty() => {
            let max_abs = est.iter().map(|e| e.gap.abs()).fold(0.0, f64::max);
            let min = est.iter().map(|e| e.gap).fold(f64::INFINITY, f64::min);
            let c = est.last().map(|e| e.empirical_c).unwrap_or(f64::NAN);
            extras.push(("windows".into(), est.len() as f64));
            extras.push(("empirical_c".into(), c));
            (max_abs, min, c)
        }
        _ => (f64::NAN, f64::NAN, f64::NAN),
    }
}

fn soliton_checks(
    config: &ExperimentConfig,
    prepared: &Prepared,
    final_state: &FieldState,
    records: &[DiagnosticsRecord],
    extras: &mut Vec<(String, f64)>,
) -> Vec<Assertion> {
    let p = config.p;
    let shift = config.initial.center + final_state.time;
    let exact = Field::from_fn(prepared.grid.clone(), |x| ground_state_value(p, x - shift));
    let tracking = match exact.and_then(|q| final_state.field.zip_with(&q, |a, b| a - b).map(|d| (d, q))) {
        Ok((diff, q)) => diff.l2_norm() / q.l2_norm(),
        Err(_) => f64::NAN,
    };
    let residual = traveling_wave_residual(&prepared.initial, p).unwrap_or(f64::NAN);
    let (max_gap, _, _) = gap_extremes(records, config.window, extras);
    vec![
        Assertion::new("tracking_error", tracking, Relation::Less, 1e-4),
        Assertion::new("profile_residual", residual, Relation::Less, 1e-8),
        Assertion::new("max_abs_gap", max_gap, Relation::Less, 1e-6),
    ]
}

/// Worst relative mismatch between the centered difference of `V` and the
/// virial right-hand side, with `1e-6 M L^2` as the absolute floor.
pub fn virial_residual(records: &[DiagnosticsRecord], length: f64) -> (f64, f64) {
    if records.len() < 3 {
        return (f64::NAN, f64::NAN);
    }
    let floor = 1e-6 * records[0].mass * length * length;
    let mut worst = (0.0, records[1].time);
    for w in records.windows(3) {
        let fd = (w[2].second_moment - w[0].second_moment) / (w[2].time - w[0].time);
        let rel = (fd - w[1].virial_rhs).abs() / w[1].virial_rhs.abs().max(floor);
        if rel > worst.0 {
            worst = (rel, w[1].time);
        }
    }
    worst
}

fn virial_check(config: &ExperimentConfig, records: &[DiagnosticsRecord], extras: &mut Vec<(String, f64)>) -> Assertion {
    let (worst, at) = virial_residual(records, config.length);
    extras.push(("virial_worst_time".into(), at));
    Assertion::new("virial_residual", worst, Relation::Less, 1e-3)
}

/// Smallest increment of `<x>_M - <x>_E` between consecutive records.
pub fn min_center_separation_increment(records: &[DiagnosticsRecord]) -> f64 {
    records
        .windows(2)
        .map(|w| (w[1].x_mass - w[1].x_energy) - (w[0].x_mass - w[0].x_energy))
        .fold(f64::INFINITY, f64::min)
}

fn monotonicity_checks(
    config: &ExperimentConfig,
    records: &[DiagnosticsRecord],
    extras: &mut Vec<(String, f64)>,
) -> Vec<Assertion> {
    let (_, min_gap, c) = gap_extremes(records, config.window, extras);
    vec![
        Assertion::new("min_window_gap", min_gap, Relation::Greater, 0.0),
        Assertion::new("empirical_c", c, Relation::Greater, 0.0),
        Assertion::new("min_separation_increment", min_center_separation_increment(records), Relation::Greater, 0.0),
    ]
}

/// Time after which the energy-gap term exceeds `C1 = max |flux term|`, and
/// the smallest centered `dV/dt` at later interior records.
pub fn dominance_regime(records: &[DiagnosticsRecord], terms: &[VirialTerms]) -> (f64, f64, f64) {
    let c1 = terms.iter().map(|t| t.flux_term.abs()).fold(0.0, f64::max);
    let Some(start) = terms.iter().position(|t| t.gap_term > c1) else {
        return (c1, f64::INFINITY, f64::NAN);
    };
    let min_slope = (start + 1..records.len().saturating_sub(1))
        .map(|i| (records[i + 1].second_moment - records[i - 1].second_moment) / (records[i + 1].time - records[i - 1].time))
        .fold(f64::NAN, f64::min);
    (c1, records[start].time, min_slope)
}

fn growth_checks(records: &[DiagnosticsRecord], terms: &[VirialTerms], extras: &mut Vec<(String, f64)>) -> Vec<Assertion> {
    let ratio = match (records.first(), records.last()) {
        (Some(a), Some(b)) => b.second_moment / a.second_moment,
        _ => f64::NAN,
    };
    let (c1, regime, min_slope) = dominance_regime(records, terms);
    let last = records.last().map(|r| r.time).unwrap_or(f64::NAN);
    extras.push(("flux_term_bound".into(), c1));
    extras.push(("regime_time".into(), regime));
    vec![
        Assertion::new("second_moment_ratio", ratio, Relation::Greater, 2.0),
        Assertion::new("regime_time", regime, Relation::Less, last),
        Assertion::new("min_dv_dt_after_regime", min_slope, Relation::Greater, 0.0),
    ]
}

fn tail_checks(records: &[DiagnosticsRecord], side: &Side, extras: &mut Vec<(String, f64)>) -> Vec<Assertion> {
    let min_ratio = records
        .iter()
        .zip(&side.bounds)
        .map(|(r, b)| b / r.second_moment)
        .fold(f64::INFINITY, f64::min);
    if let (Some(profile), Some(last)) = (&side.last_profile, records.last()) {
        extras.push(("decay_exponent".into(), profile.decay_exponent(last.mass).unwrap_or(f64::NAN)));
        extras.push(("final_bound".into(), *side.bounds.last().unwrap_or(&f64::NAN)));
        for (k, (r, t)) in profile.radii().iter().zip(profile.tail_masses()).enumerate() {
            extras.push((format!("dyadic.{k}.radius"), *r));
            extras.push((format!("dyadic.{k}.tail_mass"), *t));
        }
    }
    vec![Assertion::new("min_bound_over_second_moment", min_ratio, Relation::GreaterOrEqual, 1.0)]
}
