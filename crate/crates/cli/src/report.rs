//! Table rows, CSV emission/parsing, and the JSON result document.
//!
//! CSV numbers carry four significant digits; the JSON document keeps full
//! precision and echoes the complete configuration so a run can be
//! reproduced from its artifacts alone.

use serde::{Deserialize, Serialize};

use ordinal_gsd::trial::OperatingCharacteristics;

use crate::CliError;

pub const CSV_HEADER: &str = "Scenario,Effect Size,PET (%),PRN (%),Average Sample Size";

/// One table row in the operating-characteristics layout: the effect-size
/// column shows the odds ratio for proportional effects and the mean-utility
/// difference otherwise. Values are pre-rounded to four significant digits so
/// the CSV round-trips exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub effect_size: f64,
    pub pet_percent: f64,
    pub prn_percent: f64,
    pub avg_sample_size: f64,
}

/// Round to four significant digits.
pub fn sig4(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor();
    let scale = 10f64.powf(3.0 - mag);
    (x * scale).round() / scale
}

/// Format with enough decimals to reproduce the sig4-rounded value exactly.
pub fn fmt_sig4(x: f64) -> String {
    let r = sig4(x);
    if r == 0.0 {
        return "0".to_string();
    }
    let mag = r.abs().log10().floor() as i32;
    let decimals = (3 - mag).max(0) as usize;
    format!("{r:.decimals$}")
}

impl ReportRow {
    pub fn new(scenario: &str, effect_size: f64, oc: &OperatingCharacteristics) -> Self {
        Self {
            scenario: scenario.to_string(),
            effect_size: sig4(effect_size),
            pet_percent: sig4(oc.pet),
            prn_percent: sig4(oc.prn),
            avg_sample_size: sig4(oc.avg_n_per_arm),
        }
    }

    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.scenario,
            fmt_sig4(self.effect_size),
            fmt_sig4(self.pet_percent),
            fmt_sig4(self.prn_percent),
            fmt_sig4(self.avg_sample_size),
        )
    }

    fn from_csv_line(line: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(CliError::Config(format!(
                "malformed CSV row (expected 5 fields): {line}"
            )));
        }
        let num = |s: &str| -> Result<f64, CliError> {
            s.parse()
                .map_err(|e| CliError::Config(format!("bad number `{s}` in CSV: {e}")))
        };
        Ok(Self {
            scenario: parts[0].to_string(),
            effect_size: num(parts[1])?,
            pet_percent: num(parts[2])?,
            prn_percent: num(parts[3])?,
            avg_sample_size: num(parts[4])?,
        })
    }
}

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(CliError::Config(format!(
                "unexpected CSV header: {other:?}"
            )))
        }
    }
    lines.map(ReportRow::from_csv_line).collect()
}

/// Per-scenario summary of the trial log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub odds_ratios: Vec<f64>,
    pub mean_utility_difference: f64,
    pub pet_percent: f64,
    pub prn_percent: f64,
    pub avg_n_per_arm: f64,
    pub avg_n_total: f64,
    pub n_trials: usize,
    pub n_valid: usize,
    pub reruns: usize,
    pub stopped_futile: usize,
    pub superior: usize,
    pub not_effective: usize,
}

/// Table column interpretation used by printed/curve outputs.
pub fn effect_size_of(scenario: &ordinal_gsd::ordinal::Scenario) -> f64 {
    if scenario.effect.is_proportional() {
        scenario.effect.odds_ratios()[0]
    } else {
        scenario.mean_utility_difference
    }
}

pub fn print_table(rows: &[ReportRow]) {
    println!(
        "{:<10} {:>12} {:>9} {:>9} {:>20}",
        "Scenario", "Effect Size", "PET (%)", "PRN (%)", "Average Sample Size"
    );
    for r in rows {
        println!(
            "{:<10} {:>12} {:>9} {:>9} {:>20}",
            r.scenario,
            fmt_sig4(r.effect_size),
            fmt_sig4(r.pet_percent),
            fmt_sig4(r.prn_percent),
            fmt_sig4(r.avg_sample_size),
        );
    }
}
