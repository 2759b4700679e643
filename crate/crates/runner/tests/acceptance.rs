//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::ops::ControlFlow;
use std::path::Path;
use std::time::Instant;

use gkdv_core::diagnostics::{
    center_of_energy, center_of_mass, dyadic_bound, energy, mass, record, second_moment, tail_mass,
    virial_rhs, BoundOutcome, DiagnosticsRecord, TailProfile,
};
use gkdv_core::dynamics::{evolve, FieldState, ModelParams, Stepper};
use gkdv_core::grid::{make_grid, Field};
use gkdv_core::initial::{gaussian, ground_state, traveling_wave_residual};
use gkdv_runner::scenario::virial_residual;
use gkdv_runner::{parse_config, run_scenario, RunReport, Status};
use num_complex::Complex64;

struct Check {
    label: String,
    passed: bool,
    detail: String,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { label: label.into(), passed, detail: detail.into() }
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion { id, title, checks: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(label, passed, detail));
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn print(&self) {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict}  {}", self.id, self.title);
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            println!("    [{mark}] {}: {}", c.label, c.detail);
        }
        for n in &self.notes {
            println!("    note: {n}");
        }
    }
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_drift(records: &[DiagnosticsRecord], f: fn(&DiagnosticsRecord) -> f64) -> f64 {
    let f0 = f(&records[0]);
    records.iter().map(|r| ((f(r) - f0) / f0).abs()).fold(0.0, f64::max)
}

fn run_to(initial: &FieldState, t_final: f64, dt: f64, params: &ModelParams) -> FieldState {
    evolve(initial, t_final, dt, params, usize::MAX, |_| ControlFlow::Continue(())).unwrap()
}

#[allow(clippy::too_many_arguments)]
fn config_text(
    dir: &Path,
    tag: &str,
    scenario: &str,
    n: usize,
    length: f64,
    p: f64,
    sigma: &str,
    kind: &str,
    center: f64,
    t_final: f64,
) -> String {
    format!(
        "scenario = {scenario}\n\
         grid.n_points = {n}\ngrid.length = {length}\n\
         model.p = {p}\nmodel.sigma = {sigma}\n\
         initial.kind = {kind}\ninitial.center = {center}\n\
         time.t_final = {t_final}\ntime.dt = 0.001\ntime.record_stride = 10\n\
         analysis.window = 1.0\nanalysis.epsilon = 1.0\n\
         output.csv = {}\noutput.summary = {}\n",
        dir.join(format!("{tag}.csv")).display(),
        dir.join(format!("{tag}.txt")).display(),
    )
}

fn run_config(text: &str) -> RunReport {
    let config = parse_config(text).expect("acceptance config parses");
    let report = run_scenario(&config).expect("acceptance initial data builds");
    gkdv_runner::emit(&report, &config).expect("outputs written");
    report
}

fn describe_assertions(report: &RunReport) -> String {
    let mut parts: Vec<String> = report
        .assertions
        .iter()
        .map(|a| format!("{} = {:.4e} {} {:e}", a.name, a.value, a.relation.symbol(), a.limit))
        .collect();
    if let Status::Aborted { time, reason } = &report.status {
        parts.push(format!("aborted at t = {time}: {reason}"));
    }
    parts.join(", ")
}

/// Records of the defocusing p = 2 Gaussian run with N = 1024, L = 100, T = 10.
fn conservation_run() -> (Vec<DiagnosticsRecord>, f64) {
    let g = make_grid(1024, 100.0).unwrap();
    let params = ModelParams::defocusing(2.0).unwrap();
    let u0 = gaussian(&g, 1.0, 1.0, 0.0).unwrap();
    let mut records = Vec::new();
    let start = Instant::now();
    evolve(&FieldState::new(0.0, u0), 10.0, 1e-3, &params, 10, |s| {
        records.push(record(s, &params, 10.0).unwrap());
        ControlFlow::Continue(())
    })
    .unwrap();
    (records, start.elapsed().as_secs_f64())
}

fn criterion_1(records: &[DiagnosticsRecord], seconds: f64) -> Criterion {
    let mut c = Criterion::new(1, "conservation: p = 2 Gaussian, N = 1024, L = 100, dt = 1e-3, T = 10");
    let dm = max_drift(records, |r| r.mass);
    let de = max_drift(records, |r| r.energy);
    c.check("mass drift", dm < 1e-8, format!("{dm:.3e} < 1e-8"));
    c.check("energy drift", de < 1e-6, format!("{de:.3e} < 1e-6"));
    c.check("runtime", seconds < 60.0, format!("{seconds:.1} s < 60 s"));
    c
}

fn criterion_2(dir: &Path) -> Criterion {
    let mut c = Criterion::new(2, "soliton control: focusing p = 3, Q at -L/4, T = 5");
    let report = run_config(&config_text(dir, "soliton", "soliton_control", 1024, 100.0, 3.0, "-1", "ground_state", -25.0, 5.0));
    for name in ["tracking_error", "profile_residual", "max_abs_gap"] {
        match report.assertion(name) {
            Some(a) => c.check(name, a.passed(), format!("{:.3e} {} {:e}", a.value, a.relation.symbol(), a.limit)),
            None => c.check(name, false, describe_assertions(&report)),
        }
    }
    c
}

fn criterion_3(records: &[DiagnosticsRecord], wrap_free: &[(f64, &RunReport)]) -> Criterion {
    let mut c = Criterion::new(3, "virial identity on the criterion 1 run");
    let (worst, at) = virial_residual(records, 100.0);
    let edge_at_worst = records.iter().find(|r| r.time == at).map(|r| r.boundary_mass).unwrap_or(f64::NAN);
    c.check(
        "max relative residual over all records",
        worst < 1e-3,
        format!("{worst:.3e} < 1e-3 (worst at t = {at:.2}, boundary mass there {edge_at_worst:.2e})"),
    );

    let m0 = records[0].mass;
    let floor = 1e-6 * m0 * 100.0 * 100.0;
    let first_bad = records.windows(3).find(|w| {
        let fd = (w[2].second_moment - w[0].second_moment) / (w[2].time - w[0].time);
        (fd - w[1].virial_rhs).abs() >= 1e-3 * w[1].virial_rhs.abs().max(floor)
    });
    if let Some(w) = first_bad {
        c.notes.push(format!(
            "residual first exceeds the tolerance at t = {:.2}, boundary mass {:.2e} = {:.2e} M",
            w[1].time,
            w[1].boundary_mass,
            w[1].boundary_mass / m0
        ));
    }
    let guarded = records.iter().take_while(|r| r.boundary_mass <= 1e-8 * m0).count();
    let (prefix, _) = virial_residual(&records[..guarded], 100.0);
    c.notes.push(format!(
        "before the default wrap guard would trip (t < {:.2}) the residual is {prefix:.3e}",
        records.get(guarded).map(|r| r.time).unwrap_or(f64::NAN)
    ));
    for (length, report) in wrap_free {
        let (r, _) = virial_residual(&report.records, *length);
        c.notes.push(format!("same identity on the wrap-free L = {length} run: {r:.3e}"));
    }
    c
}

struct DefocusingRuns {
    p: f64,
    length: f64,
    monotonicity: RunReport,
    growth: RunReport,
    tails: RunReport,
}

fn defocusing_runs(dir: &Path, p: f64, n: usize, length: f64, center: f64) -> DefocusingRuns {
    let cfg = |scenario: &str| {
        let tag = format!("{scenario}_p{p}");
        config_text(dir, &tag, scenario, n, length, p, "+1", "gaussian", center, 3.0)
    };
    DefocusingRuns {
        p,
        length,
        monotonicity: run_config(&cfg("tao_monotonicity")),
        growth: run_config(&cfg("second_moment_growth")),
        tails: run_config(&cfg("tail_decay_probe")),
    }
}

fn check_all(c: &mut Criterion, prefix: &str, report: &RunReport) {
    let aborted = matches!(report.status, Status::Aborted { .. });
    if aborted || report.assertions.is_empty() {
        c.check(prefix, false, describe_assertions(report));
        return;
    }
    for a in &report.assertions {
        c.check(
            format!("{prefix} {}", a.name),
            a.passed(),
            format!("{:.4e} {} {:e}", a.value, a.relation.symbol(), a.limit),
        );
    }
}

fn criterion_4(runs: &[DefocusingRuns]) -> Criterion {
    let mut c = Criterion::new(4, "monotone center gap: defocusing p = 2 and p = 3, window 1.0");
    for r in runs {
        check_all(&mut c, &format!("p = {}", r.p), &r.monotonicity);
        c.notes.push(format!(
            "p = {}: L = {}, empirical_c = {:.4}, windows = {}",
            r.p,
            r.length,
            r.monotonicity.extra("empirical_c").unwrap_or(f64::NAN),
            r.monotonicity.extra("windows").unwrap_or(f64::NAN)
        ));
    }
    c
}

fn criterion_5(runs: &[DefocusingRuns]) -> Criterion {
    let mut c = Criterion::new(5, "second moment growth on the same runs");
    for r in runs {
        check_all(&mut c, &format!("p = {}", r.p), &r.growth);
        c.notes.push(format!(
            "p = {}: C1 = {:.4e}, gap term dominates from t = {}, V(T)/V(0) = {:.2}",
            r.p,
            r.growth.extra("flux_term_bound").unwrap_or(f64::NAN),
            r.growth.extra("regime_time").unwrap_or(f64::NAN),
            r.growth.assertion("second_moment_ratio").map(|a| a.value).unwrap_or(f64::NAN)
        ));
    }
    c
}

fn criterion_6(runs: &[DefocusingRuns]) -> Criterion {
    let mut c = Criterion::new(6, "dyadic tail bound");
    let cubic: Vec<f64> = (0..6).map(|k| 2f64.powi(-3 * k)).collect();
    let bound = dyadic_bound(&TailProfile::from_tail_masses(0.0, cubic).unwrap(), 4.0, 1.0, 1.0).unwrap();
    c.check("T_k = 2^-3k, eps = 1, M = 4", bound == BoundOutcome::Finite(12.0), format!("{bound:?} == Finite(12.0)"));
    let square: Vec<f64> = (0..6).map(|k| 2f64.powi(-2 * k)).collect();
    let bound = dyadic_bound(&TailProfile::from_tail_masses(0.0, square).unwrap(), 1.0, 0.0, 1.0).unwrap();
    c.check("T_k = 2^-2k, eps = 0", bound == BoundOutcome::Divergent, format!("{bound:?}"));
    for r in runs {
        check_all(&mut c, &format!("p = {} snapshots", r.p), &r.tails);
        c.notes.push(format!(
            "p = {}: fitted tail decay exponent at T = 3: {:.4}",
            r.p,
            r.tails.extra("decay_exponent").unwrap_or(f64::NAN)
        ));
    }
    c
}

fn successive_errors(p: f64, n: usize, dt: f64) -> (f64, f64) {
    let g = make_grid(n, 50.0).unwrap();
    let params = ModelParams::defocusing(p).unwrap();
    let s0 = FieldState::new(0.0, gaussian(&g, 1.0, 1.0, 0.0).unwrap());
    let coarse = run_to(&s0, 1.0, dt, &params);
    let half = run_to(&s0, 1.0, dt / 2.0, &params);
    let quarter = run_to(&s0, 1.0, dt / 4.0, &params);
    (
        relative_l2(coarse.field.values(), half.field.values()),
        relative_l2(half.field.values(), quarter.field.values()),
    )
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new(7, "oracle micro-suite");
    let g = make_grid(512, 40.0).unwrap();
    let bell = Field::from_fn(g.clone(), |x| (-x * x).exp()).unwrap();
    let integral = g.integrate_values(bell.values());
    let err = (integral - PI.sqrt()).abs();
    c.check("int exp(-x^2) = sqrt(pi)", err < 1e-12, format!("|error| {err:.2e} < 1e-12"));
    let gauss = gaussian(&g, 1.0, 1.0, 0.0).unwrap();
    let err = (mass(&gauss) - PI.sqrt()).abs().max((second_moment(&gauss, 0.0) - PI.sqrt() / 2.0).abs());
    c.check("Gaussian mass and second moment", err < 1e-10, format!("|error| {err:.2e} < 1e-10"));

    let g = make_grid(1024, 100.0).unwrap();
    let q = ground_state(3.0, &g, 0.0).unwrap();
    let err = (mass(&q) - 4.0).abs();
    c.check("int Q^2 = 4 (p = 3)", err < 1e-10, format!("|error| {err:.2e} < 1e-10"));
    let e = energy(&q, &ModelParams::focusing(3.0).unwrap()).unwrap();
    let err = (e + 2.0 / 3.0).abs();
    c.check("focusing E(Q) = -2/3", err < 1e-8, format!("|error| {err:.2e} < 1e-8"));
    let err = [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&r: &f64| (tail_mass(&q, 0.0, r) - 4.0 * (1.0 - r.tanh())).abs())
        .fold(0.0, f64::max);
    c.check("tail mass 4(1 - tanh R)", err < 1e-8, format!("max |error| {err:.2e} < 1e-8"));
    let res = [2.0, 3.0, 5.0]
        .iter()
        .map(|&p| traveling_wave_residual(&ground_state(p, &g, 0.0).unwrap(), p).unwrap())
        .fold(0.0, f64::max);
    c.check("ground-state residual", res < 1e-8, format!("{res:.2e} < 1e-8"));

    let g = make_grid(64, 20.0).unwrap();
    let k1 = 2.0 * PI / 20.0;
    let dt = 0.37;
    let u0 = Field::from_fn(g.clone(), |x| (k1 * x).sin()).unwrap();
    let stepper = Stepper::new(g.clone(), ModelParams::defocusing(2.0).unwrap(), dt).unwrap().linear_only();
    let next = stepper.step(&FieldState::new(0.0, u0.clone())).unwrap();
    let (before, after) = (g.forward(u0.values()), g.forward(next.field.values()));
    let err = [1usize, 63]
        .iter()
        .map(|&m| (after[m] - before[m] * Complex64::from_polar(1.0, g.wavenumbers()[m].powi(3) * dt)).norm())
        .fold(0.0, f64::max);
    c.check("linear propagator per mode", err < 1e-12, format!("{err:.2e} < 1e-12"));

    let (e1, e2) = successive_errors(2.0, 256, 0.0125);
    c.check(
        "self-convergence, p = 2, T = 1",
        e2 <= e1 / 12.0,
        format!("err(dt) / err(dt/2) = {:.2} >= 12", e1 / e2),
    );
    c
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new(8, "invariance suite");
    let g = make_grid(512, 60.0).unwrap();
    let params = ModelParams::defocusing(2.0).unwrap();
    let profile = |x: f64| (-(x - 1.0).powi(2)).exp() + 0.5 * (-(x + 2.0).powi(2) / 3.0).exp();
    let shift_nodes = 37;
    let s = shift_nodes as f64 * g.dx();
    let u = Field::from_fn(g.clone(), profile).unwrap();
    let us = Field::from_fn(g.clone(), |x| profile(x - s)).unwrap();
    let dm = center_of_mass(&us).unwrap() - center_of_mass(&u).unwrap() - s;
    let de = center_of_energy(&us, &params).unwrap() - center_of_energy(&u, &params).unwrap() - s;
    let err = dm.abs().max(de.abs());
    c.check("centers shift with the data", err < 1e-10, format!("{err:.2e} < 1e-10"));

    let xm = center_of_mass(&u).unwrap();
    let err = [-3.0, 0.5, 7.0]
        .iter()
        .map(|&a| ((second_moment(&u, a) - second_moment(&u, xm)) - mass(&u) * (a - xm).powi(2)).abs())
        .fold(0.0, f64::max);
    c.check("completing the square", err < 1e-10, format!("{err:.2e} < 1e-10"));

    let even = gaussian(&g, 0.8, 1.5, 2.0).unwrap();
    let err = (center_of_mass(&even).unwrap() - 2.0)
        .abs()
        .max((center_of_energy(&even, &params).unwrap() - 2.0).abs())
        .max(virial_rhs(&even, &params).unwrap().abs());
    c.check("even profile nulls", err < 1e-12, format!("{err:.2e} < 1e-12"));

    let g = make_grid(256, 50.0).unwrap();
    let odd_params = ModelParams::defocusing(2.5).unwrap();
    let u0 = Field::from_fn(g.clone(), |x| (-(x - 1.0).powi(2)).exp() - 0.4 * (-(x + 2.0).powi(2) / 2.0).exp()).unwrap();
    let a = run_to(&FieldState::new(0.0, u0.clone()), 1.0, 0.01, &odd_params);
    let b = run_to(&FieldState::new(0.0, u0.map(|v| -v).unwrap()), 1.0, 0.01, &odd_params);
    let flipped: Vec<f64> = b.field.values().iter().map(|v| -v).collect();
    let err = max_abs_diff(a.field.values(), &flipped);
    c.check("flow commutes with u -> -u", err < 1e-14, format!("{err:.2e} < 1e-14"));

    let (n, length, dt, t, lambda) = (512, 80.0, 4e-3, 1.0, 2.0f64);
    for p in [2.0, 3.0] {
        let params = ModelParams::defocusing(p).unwrap();
        let amp = lambda.powf(2.0 / (p - 1.0));
        let g = make_grid(n, length).unwrap();
        let gs = make_grid(n, length / lambda).unwrap();
        let u0 = gaussian(&g, 1.0, 1.0, 0.0).unwrap();
        let us0 = Field::new(gs, u0.values().iter().map(|v| amp * v).collect()).unwrap();
        let a = run_to(&FieldState::new(0.0, u0), t, dt, &params);
        let b = run_to(&FieldState::new(0.0, us0), t / lambda.powi(3), dt / lambda.powi(3), &params);
        let expected: Vec<f64> = a.field.values().iter().map(|v| amp * v).collect();
        let err = relative_l2(b.field.values(), &expected);
        c.check(format!("scaling symmetry, p = {p}, lambda = 2"), err < 1e-5, format!("{err:.2e} < 1e-5"));
    }
    c
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut criteria = Vec::new();

    let (records, seconds) = conservation_run();
    criteria.push(criterion_1(&records, seconds));
    criteria.push(criterion_2(dir.path()));
    let runs = [
        defocusing_runs(dir.path(), 2.0, 4096, 400.0, 100.0),
        defocusing_runs(dir.path(), 3.0, 8192, 800.0, 200.0),
    ];
    let wrap_free: Vec<(f64, &RunReport)> = runs.iter().map(|r| (r.length, &r.monotonicity)).collect();
    criteria.push(criterion_3(&records, &wrap_free));
    criteria.push(criterion_4(&runs));
    criteria.push(criterion_5(&runs));
    criteria.push(criterion_6(&runs));
    criteria.push(criterion_7());
    criteria.push(criterion_8());

    println!();
    for c in &criteria {
        c.print();
    }
    let failed: Vec<u32> = criteria.iter().filter(|c| !c.passed()).map(|c| c.id).collect();
    println!();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
