//! Scenario configuration and deterministic report emission.
//!
//! Configs are JSON documents naming a scenario, a 64-bit master seed, and a
//! per-scenario parameter map. Reports echo the resolved configuration and
//! carry metrics, pass/fail checks against built-in expectations, and
//! transcript digests.
//!
//! JSON emission is canonical: object keys sorted, floats rendered as their
//! shortest round-tripping decimal. The same config and seed produce byte
//! identical reports; wall time never enters the JSON and appears only in the
//! text footer.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Config rejection: parse failures and precondition violations, each naming
/// what was wrong.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl ConfigError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

/// The scenarios the runner knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    GroverDemo,
    MineRace,
    Bb84,
    GhzConsensus,
    Dba,
    SignAttack,
    FullDemo,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::GroverDemo,
        ScenarioName::MineRace,
        ScenarioName::Bb84,
        ScenarioName::GhzConsensus,
        ScenarioName::Dba,
        ScenarioName::SignAttack,
        ScenarioName::FullDemo,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::GroverDemo => "grover-demo",
            ScenarioName::MineRace => "mine-race",
            ScenarioName::Bb84 => "bb84",
            ScenarioName::GhzConsensus => "ghz-consensus",
            ScenarioName::Dba => "dba",
            ScenarioName::SignAttack => "sign-attack",
            ScenarioName::FullDemo => "full-demo",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-scenario parameters; every field optional, defaults are scenario
/// specific. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Proof-of-work difficulty in leading zero bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<u8>,
    /// Width of the restricted nonce space for mining puzzles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonce_bits: Option<u32>,
    /// Chain length for the full demo.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    /// Register width for the Grover demo.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
    /// Marked-index count for the Grover demo.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marked: Option<u64>,
    /// Node count for consensus scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Byzantine node ids.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub byzantine: Option<Vec<usize>>,
    /// GHZ coin rounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u64>,
    /// Eavesdropper interception fraction.
    #[serde(rename = "f", skip_serializing_if = "Option::is_none")]
    pub eve_fraction: Option<f64>,
    /// Transmitted qubit count for BB84.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort_threshold: Option<f64>,
    /// Correlated-list length for detectable broadcast.
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub list_length: Option<usize>,
    /// Attacker power fraction for fork races.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Confirmation depth for fork races.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<u32>,
    /// Monte Carlo trial count (races, broadcast arms, key attacks).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Mining trial count for query measurements.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mining_trials: Option<u64>,
    /// Per-block difficulty driving the Grover racer's query budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pow_bits: Option<u32>,
    /// Toy key size: the prime modulus is drawn below 2^key_bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_bits: Option<u32>,
}

/// A full scenario request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub master_seed: u64,
    #[serde(default)]
    pub params: ScenarioParams,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A single named measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: MetricValue,
    pub units: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MetricValue {
    Bool(bool),
    Unsigned(u64),
    Float(f64),
    Text(String),
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricValue::Bool(v) => write!(f, "{v}"),
            MetricValue::Unsigned(v) => write!(f, "{v}"),
            MetricValue::Float(v) => write!(f, "{v}"),
            MetricValue::Text(v) => f.write_str(v),
        }
    }
}

/// One built-in expectation and whether the run met it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Digest of an exported transcript, for cheap cross-run comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptDigest {
    pub name: String,
    pub sha256: String,
}

/// Echo of the resolved configuration that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub scenario: ScenarioName,
    pub master_seed: u64,
    pub params: ScenarioParams,
}

/// A completed scenario run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
    pub transcript_digests: Vec<TranscriptDigest>,
    pub passed: bool,
    /// Text-footer only; never serialized.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub fn new(config: ConfigEcho) -> Self {
        Report {
            config,
            metrics: Vec::new(),
            checks: Vec::new(),
            transcript_digests: Vec::new(),
            passed: true,
            wall_time: Duration::ZERO,
        }
    }

    pub fn metric(&mut self, name: &str, value: MetricValue, units: &str) {
        if let MetricValue::Float(v) = value {
            debug_assert!(v.is_finite(), "metric {name} is not finite");
        }
        self.metrics.push(Metric {
            name: name.to_string(),
            value,
            units: units.to_string(),
        });
    }

    pub fn metric_u(&mut self, name: &str, value: u64, units: &str) {
        self.metric(name, MetricValue::Unsigned(value), units);
    }

    pub fn metric_f(&mut self, name: &str, value: f64, units: &str) {
        self.metric(name, MetricValue::Float(value), units);
    }

    pub fn metric_b(&mut self, name: &str, value: bool) {
        self.metric(name, MetricValue::Bool(value), "");
    }

    pub fn metric_t(&mut self, name: &str, value: impl Into<String>) {
        self.metric(name, MetricValue::Text(value.into()), "");
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn digest(&mut self, name: &str, sha256_hex: String) {
        self.transcript_digests.push(TranscriptDigest {
            name: name.to_string(),
            sha256: sha256_hex,
        });
    }

    /// Find a metric by name (mostly for tests and the FFI layer).
    pub fn metric_value(&self, name: &str) -> Option<&MetricValue> {
        self.metrics.iter().find(|m| m.name == name).map(|m| &m.value)
    }
}

/// Output encodings for [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!("unknown format `{other}` (expected json or text)")),
        }
    }
}

/// Render a report.
///
/// JSON output is canonical: serialization goes through `serde_json::Value`,
/// whose object maps are ordered, so keys come out sorted and re-emitting a
/// parsed report reproduces the bytes exactly.
pub fn emit(report: &Report, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let value = serde_json::to_value(report).expect("reports serialize");
            let mut bytes = serde_json::to_vec(&value).expect("values serialize");
            bytes.push(b'\n');
            bytes
        }
        ReportFormat::Text => emit_text(report),
    }
}

fn emit_text(report: &Report) -> Vec<u8> {
    use std::fmt::Write;

    let mut out = String::new();
    let rule = "-".repeat(72);
    writeln!(out, "qchain-sim report: {}", report.config.scenario).unwrap();
    writeln!(out, "seed: {}", report.config.master_seed).unwrap();
    writeln!(out, "{rule}").unwrap();
    for metric in &report.metrics {
        writeln!(
            out,
            "{:<44} {:>20} {}",
            metric.name,
            metric.value.to_string(),
            metric.units
        )
        .unwrap();
    }
    writeln!(out, "{rule}").unwrap();
    let passed = report.checks.iter().filter(|c| c.passed).count();
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        writeln!(out, "checks: {passed}/{} passed", report.checks.len()).unwrap();
    } else {
        writeln!(
            out,
            "checks: {passed}/{} passed (failed: {})",
            report.checks.len(),
            failed.join(", ")
        )
        .unwrap();
    }
    writeln!(out, "wall time: {:.3} s", report.wall_time.as_secs_f64()).unwrap();
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_report() -> Report {
        Report::new(ConfigEcho {
            scenario: ScenarioName::Bb84,
            master_seed: 7,
            params: ScenarioParams::default(),
        })
    }

    #[test]
    fn config_parses_kebab_scenario_names() {
        let config =
            ScenarioConfig::from_json(r#"{"scenario": "ghz-consensus", "master_seed": 9}"#)
                .unwrap();
        assert_eq!(config.scenario, ScenarioName::GhzConsensus);
        assert_eq!(config.master_seed, 9);
        assert_eq!(config.params, ScenarioParams::default());
    }

    #[test]
    fn unknown_scenarios_and_keys_are_rejected() {
        assert!(ScenarioConfig::from_json(r#"{"scenario": "warp", "master_seed": 1}"#).is_err());
        assert!(ScenarioConfig::from_json(
            r#"{"scenario": "bb84", "master_seed": 1, "params": {"bogus": 3}}"#
        )
        .is_err());
    }

    #[test]
    fn empty_metric_report_is_valid_json() {
        let report = empty_report();
        let bytes = emit(&report, ReportFormat::Json);
        let value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(value["metrics"], serde_json::json!([]));
        assert_eq!(value["passed"], serde_json::json!(true));
    }

    #[test]
    fn json_emission_is_a_fixed_point() {
        let mut report = empty_report();
        report.metric_f("qber", 0.2468013579, "fraction");
        report.metric_u("qubits", 1024, "count");
        report.check("zeroish", true, "fine");
        let bytes = emit(&report, ReportFormat::Json);
        let value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let mut again = serde_json::to_vec(&value).unwrap();
        again.push(b'\n');
        assert_eq!(bytes, again);
    }

    #[test]
    fn json_keys_are_sorted() {
        let report = empty_report();
        let bytes = emit(&report, ReportFormat::Json);
        let text = String::from_utf8(bytes).unwrap();
        let checks = text.find("\"checks\"").unwrap();
        let config = text.find("\"config\"").unwrap();
        let metrics = text.find("\"metrics\"").unwrap();
        let passed = text.find("\"passed\"").unwrap();
        assert!(checks < config && config < metrics && metrics < passed);
    }

    #[test]
    fn text_layout_is_header_metrics_footer() {
        let mut report = empty_report();
        report.metric_u("alpha", 1, "count");
        report.metric_f("beta", 0.5, "fraction");
        report.check("ok", true, "");
        let text = String::from_utf8(emit(&report, ReportFormat::Text)).unwrap();
        // 3 header lines + one line per metric + 3 footer lines.
        assert_eq!(text.lines().count(), 3 + 2 + 3);
        assert!(text.starts_with("qchain-sim report: bb84\n"));
        assert!(text.contains("wall time:"));
    }

    #[test]
    fn failed_checks_flip_the_report_and_show_in_text() {
        let mut report = empty_report();
        report.check("tolerance", false, "off by a mile");
        assert!(!report.passed);
        let text = String::from_utf8(emit(&report, ReportFormat::Text)).unwrap();
        assert!(text.contains("failed: tolerance"));
    }
}
