//! CSV and summary serialization.

use std::fs;
use std::io;

use gkdv_core::diagnostics::DiagnosticsRecord;

use crate::config::ExperimentConfig;
use crate::scenario::{RunReport, Status};

pub const CSV_HEADER: &str = "t,mass,energy,x_mass,x_energy,second_moment,virial_rhs,boundary_mass";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_text(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(200 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            r.time,
            r.mass,
            r.energy,
            r.x_mass,
            r.x_energy,
            r.second_moment,
            r.virial_rhs,
            r.boundary_mass,
        ];
        let row: Vec<String> = fields.iter().map(|&v| format_float(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("csv line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

/// Parses text produced by [`csv_text`].
pub fn parse_csv(text: &str) -> Result<Vec<DiagnosticsRecord>, CsvError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(CsvError { line: 1, message: "unexpected header".into() });
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 2;
            let values = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CsvError { line: line_no, message: e.to_string() })?;
            let [time, mass, energy, x_mass, x_energy, second_moment, virial_rhs, boundary_mass] = values[..] else {
                return Err(CsvError { line: line_no, message: format!("expected 8 fields, got {}", values.len()) });
            };
            Ok(DiagnosticsRecord { time, mass, energy, x_mass, x_energy, second_moment, virial_rhs, boundary_mass })
        })
        .collect()
}

/// Flat `key = value` report: status, assertions, measurements, config echo.
pub fn summary_text(report: &RunReport, config: &ExperimentConfig) -> String {
    let mut lines: Vec<(String, String)> = vec![
        ("scenario".into(), report.scenario.name().into()),
        ("status".into(), report.status.label().into()),
        ("exit_code".into(), report.status.exit_code().to_string()),
        ("records".into(), report.records.len().to_string()),
    ];
    if let Status::Aborted { time, reason } = &report.status {
        lines.push(("abort.time".into(), format_float(*time)));
        lines.push(("abort.reason".into(), reason.clone()));
    }
    for a in &report.assertions {
        let prefix = format!("assert.{}", a.name);
        lines.push((prefix.clone(), if a.passed() { "pass" } else { "fail" }.into()));
        lines.push((format!("{prefix}.value"), format_float(a.value)));
        lines.push((format!("{prefix}.relation"), a.relation.symbol().into()));
        lines.push((format!("{prefix}.limit"), format_float(a.limit)));
    }
    for (k, v) in &report.extras {
        lines.push((format!("measure.{k}"), format_float(*v)));
    }
    for (k, v) in config.echo() {
        lines.push((format!("config.{k}"), v));
    }
    lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Writes the CSV and summary to the configured paths.
pub fn emit(report: &RunReport, config: &ExperimentConfig) -> io::Result<()> {
    for path in [&config.csv_path, &config.summary_path] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(&config.csv_path, csv_text(&report.records))?;
    fs::write(&config.summary_path, summary_text(report, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(i: usize) -> DiagnosticsRecord {
        let t = i as f64 / 3.0;
        DiagnosticsRecord {
            time: t,
            mass: std::f64::consts::PI.sqrt(),
            energy: 1.0 / 7.0 + t,
            x_mass: -t.sin(),
            x_energy: 1e-300 * t,
            second_moment: 1e10 / 3.0,
            virial_rhs: -0.0,
            boundary_mass: f64::MIN_POSITIVE,
        }
    }

    #[test]
    fn empty_list_is_header_only() {
        assert_eq!(csv_text(&[]), format!("{CSV_HEADER}\n"));
        assert_eq!(parse_csv(&csv_text(&[])).unwrap(), vec![]);
    }

    #[test]
    fn one_record_has_eight_fields() {
        let text = csv_text(&[sample(1)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 8);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let records: Vec<_> = (0..20).map(sample).collect();
        let back = parse_csv(&csv_text(&records)).unwrap();
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(a.time.to_bits(), b.time.to_bits());
            assert_eq!(a.x_energy.to_bits(), b.x_energy.to_bits());
            assert_eq!(a.virial_rhs.to_bits(), b.virial_rhs.to_bits());
            assert_eq!(a.boundary_mass.to_bits(), b.boundary_mass.to_bits());
        }
        assert_eq!(back, records);
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(parse_csv("t,mass\n").is_err());
        let err = parse_csv(&format!("{CSV_HEADER}\n1,2,3\n")).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2,3,4,5,6,7,x\n")).is_err());
    }
}
