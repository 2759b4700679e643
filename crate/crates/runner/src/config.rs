//! Flat `key = value` experiment configuration.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored.
//! Unknown or duplicated keys are errors.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gkdv_core::dynamics::{step_count, ModelParams, Sign};
use gkdv_core::grid::Grid;

use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    /// 1-based line number, when the problem is tied to a line.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    GroundState,
    Gaussian,
    Custom,
}

impl InitialKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialKind::GroundState => "ground_state",
            InitialKind::Gaussian => "gaussian",
            InitialKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    /// Sample file for `custom` profiles.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n_points: usize,
    pub length: f64,
    pub p: f64,
    pub sign: Sign,
    pub initial: InitialConfig,
    pub t_final: f64,
    pub dt: f64,
    pub record_stride: usize,
    pub delta_edge: f64,
    pub edge_mass_tol: f64,
    pub window: f64,
    pub epsilon: f64,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Every accepted key with its default (`None` means required) and meaning.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("scenario", None, "scenario name, see `gkdv scenarios`"),
    ("grid.n_points", None, "even number of grid nodes, at least 8"),
    ("grid.length", None, "period L of the domain [-L/2, L/2)"),
    ("model.p", None, "nonlinearity power, p > 1"),
    ("model.sigma", None, "+1 (defocusing) or -1 (focusing)"),
    ("initial.kind", None, "ground_state | gaussian | custom"),
    ("initial.amplitude", Some("1"), "profile amplitude"),
    ("initial.width", Some("1"), "Gaussian width (ground state: decay length, fixed at 1)"),
    ("initial.center", Some("0"), "profile center, at least 5 widths from either edge"),
    ("initial.path", Some("-"), "custom only: file with n_points whitespace-separated samples"),
    ("time.t_final", None, "final time, an integer multiple of time.dt"),
    ("time.dt", None, "fixed time step"),
    ("time.record_stride", None, "steps between diagnostic records, at least 1"),
    ("guard.delta_edge", Some("L/10"), "width of the edge bands watched by the wrap guard"),
    ("guard.edge_mass_tol", Some("1e-8"), "abort when edge mass exceeds this fraction of the initial mass"),
    ("analysis.window", Some("1"), "sliding window length for center slopes"),
    ("analysis.epsilon", Some("1"), "tail decay excess epsilon for the dyadic bound"),
    ("output.csv", None, "path of the diagnostics CSV"),
    ("output.summary", None, "path of the key = value summary"),
];

struct Entry {
    line: usize,
    value: String,
}

struct Entries(HashMap<String, Entry>);

impl Entries {
    fn raw(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.0
            .get(key)
            .ok_or_else(|| ConfigError::global(format!("missing required key `{key}`")))
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.0.get(key).map(|e| e.line)
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<T, ConfigError> {
        let e = self.raw(key)?;
        e.value
            .parse()
            .map_err(|_| ConfigError::at(e.line, format!("`{key}` expects {what}, got `{}`", e.value)))
    }

    fn parse_or<T: FromStr>(&self, key: &str, what: &str, default: T) -> Result<T, ConfigError> {
        if self.0.contains_key(key) {
            self.parse(key, what)
        } else {
            Ok(default)
        }
    }

    fn check(&self, key: &str, ok: bool, message: impl Into<String>) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(ConfigError { line: self.line(key), message: message.into() })
        }
    }
}

fn parse_sign(entry: &Entry) -> Result<Sign, ConfigError> {
    match entry.value.as_str() {
        "+1" | "1" | "defocusing" => Ok(Sign::Defocusing),
        "-1" | "focusing" => Ok(Sign::Focusing),
        other => Err(ConfigError::at(
            entry.line,
            format!("`model.sigma` expects +1 or -1, got `{other}`"),
        )),
    }
}

fn parse_kind(entry: &Entry) -> Result<InitialKind, ConfigError> {
    match entry.value.as_str() {
        "ground_state" => Ok(InitialKind::GroundState),
        "gaussian" => Ok(InitialKind::Gaussian),
        "custom" => Ok(InitialKind::Custom),
        other => Err(ConfigError::at(
            entry.line,
            format!("`initial.kind` expects ground_state, gaussian or custom, got `{other}`"),
        )),
    }
}

fn split_lines(text: &str) -> Result<Entries, ConfigError> {
    let mut map: HashMap<String, Entry> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(line, "empty key or value"));
        }
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            return Err(ConfigError::at(line, format!("unknown key `{key}`")));
        }
        if let Some(first) = map.get(key) {
            return Err(ConfigError::at(
                line,
                format!("duplicate key `{key}` (first set on line {})", first.line),
            ));
        }
        map.insert(key.to_string(), Entry { line, value: value.to_string() });
    }
    Ok(Entries(map))
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let e = split_lines(text)?;

    let scenario_entry = e.raw("scenario")?;
    let scenario = Scenario::from_name(&scenario_entry.value).ok_or_else(|| {
        ConfigError::at(scenario_entry.line, format!("unknown scenario `{}`", scenario_entry.value))
    })?;

    let n_points: usize = e.parse("grid.n_points", "a positive integer")?;
    let length: f64 = e.parse("grid.length", "a number")?;
    e.check("grid.length", length.is_finite() && length > 0.0, "`grid.length` must be positive")?;
    if let Err(err) = Grid::new(n_points, length) {
        return Err(ConfigError { line: e.line("grid.n_points"), message: err.to_string() });
    }

    let p: f64 = e.parse("model.p", "a number")?;
    let sign = parse_sign(e.raw("model.sigma")?)?;
    if let Err(err) = ModelParams::new(p, sign) {
        return Err(ConfigError { line: e.line("model.p"), message: err.to_string() });
    }

    let kind = parse_kind(e.raw("initial.kind")?)?;
    let amplitude: f64 = e.parse_or("initial.amplitude", "a number", 1.0)?;
    let width: f64 = e.parse_or("initial.width", "a number", 1.0)?;
    let center: f64 = e.parse_or("initial.center", "a number", 0.0)?;
    e.check("initial.amplitude", amplitude.is_finite(), "`initial.amplitude` must be finite")?;
    e.check("initial.width", width.is_finite() && width > 0.0, "`initial.width` must be positive")?;
    e.check("initial.center", center.is_finite(), "`initial.center` must be finite")?;
    if kind == InitialKind::GroundState {
        e.check(
            "initial.width",
            width == gkdv_core::initial::GROUND_STATE_WIDTH,
            "the ground state has a fixed width of 1",
        )?;
    }
    if kind != InitialKind::Custom {
        let margin = gkdv_core::initial::MARGIN_WIDTHS * width;
        e.check(
            "initial.center",
            center.abs() <= 0.5 * length - margin,
            format!("`initial.center` must stay {margin} away from both edges"),
        )?;
    }
    let path = match (kind, e.0.get("initial.path")) {
        (InitialKind::Custom, Some(entry)) => Some(PathBuf::from(&entry.value)),
        (InitialKind::Custom, None) => {
            return Err(ConfigError { line: e.line("initial.kind"), message: "custom profiles need `initial.path`".into() })
        }
        (_, Some(entry)) => return Err(ConfigError::at(entry.line, "`initial.path` is only used by custom profiles")),
        (_, None) => None,
    };

    let t_final: f64 = e.parse("time.t_final", "a number")?;
    let dt: f64 = e.parse("time.dt", "a number")?;
    let record_stride: usize = e.parse("time.record_stride", "a positive integer")?;
    e.check("time.dt", dt.is_finite() && dt > 0.0, "`time.dt` must be positive")?;
    e.check("time.t_final", t_final.is_finite() && t_final > 0.0, "`time.t_final` must be positive")?;
    e.check("time.record_stride", record_stride >= 1, "`time.record_stride` must be at least 1")?;
    if let Err(err) = step_count(0.0, t_final, dt) {
        return Err(ConfigError { line: e.line("time.t_final"), message: err.to_string() });
    }

    let delta_edge: f64 = e.parse_or("guard.delta_edge", "a number", 0.1 * length)?;
    let edge_mass_tol: f64 = e.parse_or("guard.edge_mass_tol", "a number", 1e-8)?;
    e.check(
        "guard.delta_edge",
        delta_edge.is_finite() && delta_edge >= 0.0 && delta_edge < 0.5 * length,
        "`guard.delta_edge` must lie in [0, L/2)",
    )?;
    e.check(
        "guard.edge_mass_tol",
        edge_mass_tol > 0.0 && edge_mass_tol < 1.0,
        "`guard.edge_mass_tol` must lie in (0, 1)",
    )?;

    let window: f64 = e.parse_or("analysis.window", "a number", 1.0)?;
    let epsilon: f64 = e.parse_or("analysis.epsilon", "a number", 1.0)?;
    e.check("analysis.window", window.is_finite() && window > 0.0, "`analysis.window` must be positive")?;
    e.check("analysis.epsilon", epsilon.is_finite() && epsilon >= 0.0, "`analysis.epsilon` must be nonnegative")?;
    let record_spacing = dt * record_stride as f64;
    e.check(
        "time.record_stride",
        record_spacing <= window,
        format!("record spacing dt * record_stride = {record_spacing} exceeds the window {window}"),
    )?;

    let csv_path = PathBuf::from(&e.raw("output.csv")?.value);
    let summary_path = PathBuf::from(&e.raw("output.summary")?.value);

    let config = ExperimentConfig {
        scenario,
        n_points,
        length,
        p,
        sign,
        initial: InitialConfig { kind, amplitude, width, center, path },
        t_final,
        dt,
        record_stride,
        delta_edge,
        edge_mass_tol,
        window,
        epsilon,
        csv_path,
        summary_path,
    };
    scenario
        .admits(&config)
        .map_err(|(key, message)| ConfigError { line: e.line(key), message })?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.p, self.sign).expect("validated at parse time")
    }

    /// Makes relative input and output paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.csv_path);
        fix(&mut self.summary_path);
        if let Some(p) = self.initial.path.as_mut() {
            fix(p);
        }
    }

    /// `(key, value)` pairs mirroring the accepted keys.
    pub fn echo(&self) -> Vec<(String, String)> {
        let sigma = match self.sign {
            Sign::Defocusing => "+1",
            Sign::Focusing => "-1",
        };
        let mut out = vec![
            ("scenario", self.scenario.name().to_string()),
            ("grid.n_points", self.n_points.to_string()),
            ("grid.length", self.length.to_string()),
            ("model.p", self.p.to_string()),
            ("model.sigma", sigma.to_string()),
            ("initial.kind", self.initial.kind.name().to_string()),
            ("initial.amplitude", self.initial.amplitude.to_string()),
            ("initial.width", self.initial.width.to_string()),
            ("initial.center", self.initial.center.to_string()),
        ];
        if let Some(p) = &self.initial.path {
            out.push(("initial.path", p.display().to_string()));
        }
        out.extend([
            ("time.t_final", self.t_final.to_string()),
            ("time.dt", self.dt.to_string()),
            ("time.record_stride", self.record_stride.to_string()),
            ("guard.delta_edge", self.delta_edge.to_string()),
            ("guard.edge_mass_tol", self.edge_mass_tol.to_string()),
            ("analysis.window", self.window.to_string()),
            ("analysis.epsilon", self.epsilon.to_string()),
            ("output.csv", self.csv_path.display().to_string()),
            ("output.summary", self.summary_path.display().to_string()),
        ]);
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
