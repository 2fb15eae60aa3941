//! The JSON record written by `verify`.

use std::collections::BTreeMap;

use condldp::conditional::{ConsistencyReport, DualityReport, SetInfimum};
use condldp::empirics::{CanonicalExpectation, SweepResult, Verdict};
use condldp::TiltSolution;
use serde::Serialize;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub config_hash: String,
    pub version: &'static str,
    pub command: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord {
    pub metadata: Metadata,
    pub tilt: TiltSolution,
    pub set_infimum: SetInfimum,
    pub consistency: ConsistencyReport,
    pub sweep: SweepResult,
    /// Grid conjugate of `Ψ_{x₀}` against `I_{x₀}`.
    pub duality: DualityReport,
    /// Same comparison for the slice free energy; diagnostic only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slice_duality: Option<DualityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalExpectation>,
    /// Sandwich verdicts against the declared `expected_rate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_verdicts: Option<Vec<Verdict>>,
    pub checks: BTreeMap<String, bool>,
    pub pass: bool,
}

impl ReportRecord {
    pub fn failed_checks(&self) -> Vec<String> {
        self.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.clone()).collect()
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}
