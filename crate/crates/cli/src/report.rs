//! Report structures shared by the text, JSON and CSV renderings.
//!
//! Every JSON report is an object `{command, config, results, warnings}`.
//! The shape of `results` depends on `command`; [`validate_report`] checks
//! a document against the typed structures below, rejecting unknown fields.

use fracoint::memory::Method;
use fracoint::nielsen::DetCase;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub results: Results,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    Memory(MemoryResults),
    Xstar(XStarResults),
    RankHualde(HualdeResults),
    RankNielsen(NielsenResults),
    SimulateCv(SimulateCvResults),
    Sigma(SigmaResults),
    SimulatePanel(SimulatePanelResults),
}

impl Results {
    pub fn command(&self) -> &'static str {
        match self {
            Results::Memory(_) => "memory",
            Results::Xstar(_) => "xstar",
            Results::RankHualde(_) => "rank-hualde",
            Results::RankNielsen(_) => "rank-nielsen",
            Results::SimulateCv(_) => "simulate-cv",
            Results::Sigma(_) => "sigma",
            Results::SimulatePanel(_) => "simulate-panel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryResults {
    pub method: Method,
    pub nobs: usize,
    pub bandwidths: Vec<usize>,
    pub series: Vec<MemoryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryRow {
    pub label: String,
    /// One estimate per bandwidth.
    pub d_hat: Vec<f64>,
    pub std_err: Vec<f64>,
    pub at_boundary: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XStarResults {
    pub columns: Vec<String>,
    pub alpha: f64,
    pub critical_value: f64,
    pub runs: Vec<XStarRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XStarRun {
    pub m: usize,
    pub d_hats: Vec<f64>,
    pub weights: Vec<f64>,
    pub d_tilde: f64,
    pub s_star: f64,
    pub x_star: f64,
    pub p_value: f64,
    pub reject: bool,
    pub discarded_imag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HualdeResults {
    pub labels: Vec<String>,
    pub alpha: Option<f64>,
    pub critical_value: f64,
    pub runs: Vec<HualdeRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HualdeRun {
    pub m: usize,
    pub d_hats: Vec<f64>,
    pub steps: Vec<HualdeStep>,
    pub r_hat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HualdeStep {
    pub step: usize,
    pub common_trends: Vec<String>,
    pub candidates: Vec<HualdeCandidate>,
    pub min_stat_label: Option<String>,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HualdeCandidate {
    pub label: String,
    pub x_star: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NielsenResults {
    pub labels: Vec<String>,
    pub nobs: usize,
    pub d1: f64,
    pub det_case: DetCase,
    pub xi: f64,
    pub cv_source: String,
    pub eigenvalues: Vec<f64>,
    pub rows: Vec<NielsenRow>,
    pub r_hat: usize,
    pub ceiling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NielsenRow {
    pub r0: usize,
    pub p_r: usize,
    pub lambda: f64,
    /// Present for the ranks that were tested.
    pub critical_value: Option<f64>,
    pub reject: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateCvResults {
    pub nobs: usize,
    pub d1: f64,
    pub reps: usize,
    pub seed: u64,
    pub max_dim: usize,
    pub cells: Vec<CvCell>,
    pub monotonicity_violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvCell {
    pub case: DetCase,
    pub xi: f64,
    pub p_r: usize,
    pub cv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaResults {
    pub periods: Vec<String>,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatePanelResults {
    pub nobs: usize,
    pub labels: Vec<String>,
    pub d: Vec<f64>,
    pub levels: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReport {
    command: String,
    config: RunConfig,
    results: serde_json::Value,
    warnings: Vec<String>,
}

fn typed<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| CliError::Report(e.to_string()))
}

/// Parses a JSON report and checks it against the schema of its command.
pub fn validate_report(json: &str) -> Result<Report> {
    let raw: RawReport = serde_json::from_str(json).map_err(|e| CliError::Report(e.to_string()))?;
    let results = match raw.command.as_str() {
        "memory" => Results::Memory(typed(raw.results)?),
        "xstar" => Results::Xstar(typed(raw.results)?),
        "rank-hualde" => Results::RankHualde(typed(raw.results)?),
        "rank-nielsen" => Results::RankNielsen(typed(raw.results)?),
        "simulate-cv" => Results::SimulateCv(typed(raw.results)?),
        "sigma" => Results::Sigma(typed(raw.results)?),
        "simulate-panel" => Results::SimulatePanel(typed(raw.results)?),
        other => return Err(CliError::Report(format!("unknown command `{other}`"))),
    };
    Ok(Report { command: raw.command, config: raw.config, results, warnings: raw.warnings })
}

/// Six significant digits, fixed notation for moderate magnitudes and
/// scientific otherwise. Used for every number in text reports.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new digit, e.g. 9.999995 -> 10.00000
        let digits = s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len();
        if digits > 6 && decimals > 0 {
            let d = decimals - 1;
            return format!("{x:.d$}");
        }
        s
    } else {
        format!("{x:.5e}")
    }
}
