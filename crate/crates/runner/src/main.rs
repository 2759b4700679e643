use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gkdv_runner::config::KEYS;
use gkdv_runner::{emit, parse_config, prepare, run_scenario, ExperimentConfig, Scenario, EXIT_CONFIG, EXIT_RUNTIME};

#[derive(Parser)]
#[command(name = "gkdv", version, about = "Numerical experiments for the generalized KdV equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run { config: PathBuf },
    /// Check a config file and its initial data without running.
    Validate { config: PathBuf },
    /// List scenarios and config keys.
    Scenarios,
}

fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut config = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(config)
}

fn run(path: &Path) -> i32 {
    let config = match load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let report = match run_scenario(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = emit(&report, &config) {
        eprintln!("output error: {e}");
        return EXIT_RUNTIME;
    }
    for a in &report.assertions {
        let verdict = if a.passed() { "pass" } else { "FAIL" };
        println!("{verdict} {}: {:e} {} {:e}", a.name, a.value, a.relation.symbol(), a.limit);
    }
    if let gkdv_runner::Status::Aborted { time, reason } = &report.status {
        eprintln!("aborted at t = {time}: {reason}");
    }
    println!("{} {}", report.scenario.name(), report.status.label());
    report.status.exit_code()
}

fn validate(path: &Path) -> i32 {
    match load(path).and_then(|c| prepare(&c).map(|_| c).map_err(|e| e.to_string())) {
        Ok(c) => {
            println!("{}: ok ({})", path.display(), c.scenario.name());
            0
        }
        Err(e) => {
            eprintln!("config error: {e}");
            EXIT_CONFIG
        }
    }
}

fn list_scenarios() {
    println!("scenarios:");
    for s in Scenario::ALL {
        println!("  {:<22} {}", s.name(), s.anchor());
    }
    println!("\nconfig keys (key = value, '#' comments):");
    for (key, default, meaning) in KEYS {
        let default = default.map(|d| format!("default {d}")).unwrap_or_else(|| "required".into());
        println!("  {key:<20} {default:<14} {meaning}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => run(&config),
        Command::Validate { config } => validate(&config),
        Command::Scenarios => {
            list_scenarios();
            0
        }
    };
    ExitCode::from(code as u8)
}
