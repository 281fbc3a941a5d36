//! Sequential cointegration rank estimation from repeated X* tests.
//!
//! Step 1 takes the series with the largest memory estimate as the first
//! common trend (CT) and tests it pairwise against every other series. If
//! every pair rejects, `r_hat = p - 1`. Otherwise the series with the
//! smallest statistic joins the CT set and step `k` tests the `k` CTs plus
//! each remaining series. The first step at which every candidate rejects
//! gives `r_hat = p - k`; if none does, `r_hat = 0`.
//!
//! Memory parameters and the cross-periodogram are computed once. Ties
//! (largest `d_hat`, smallest statistic) go to the lowest column index.
//! A candidate whose statistic cannot be computed is recorded with its
//! error and counts as not rejected.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::memory::{equal_weights, MemoryEstimate};
use crate::panel::Panel;
use crate::spectral::{cross_periodogram, PeriodogramSet};
use crate::xstar::{chi2_critical, column_estimates, xstar_from_periodogram, XStarResult};

#[derive(Debug, Clone, Serialize)]
pub struct CandidateStat {
    pub index: usize,
    pub label: String,
    /// `X*` on the CT set plus this column.
    pub stat: Option<f64>,
    /// Why the statistic could not be computed.
    pub failure: Option<String>,
    #[serde(skip)]
    pub detail: Option<XStarResult>,
}

impl CandidateStat {
    pub fn rejects(&self, critical_value: f64) -> bool {
        self.stat.is_some_and(|s| s > critical_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepDecision {
    Rejected,
    NotRejected,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    /// 1-based step number `k`.
    pub step: usize,
    pub ct_indices: Vec<usize>,
    pub ct_labels: Vec<String>,
    /// One entry per remaining column, in column order.
    pub candidates: Vec<CandidateStat>,
    /// Candidate with the smallest statistic, if any could be computed.
    pub min_stat_index: Option<usize>,
    pub min_stat_label: Option<String>,
    pub decision: StepDecision,
}

impl StepRecord {
    /// Recomputes the decision from the recorded statistics.
    pub fn decide(&self, critical_value: f64) -> StepDecision {
        if !self.candidates.is_empty() && self.candidates.iter().all(|c| c.rejects(critical_value)) {
            StepDecision::Rejected
        } else {
            StepDecision::NotRejected
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankTrace {
    pub steps: Vec<StepRecord>,
    pub r_hat: usize,
    pub alpha: Option<f64>,
    pub critical_value: f64,
    pub m: usize,
    pub labels: Vec<String>,
    pub d_hats: Vec<f64>,
    pub memory: Vec<MemoryEstimate>,
    pub warnings: Vec<String>,
}

impl RankTrace {
    /// Labels of the CT sequence in the order they were designated.
    pub fn ct_sequence(&self) -> Vec<String> {
        let mut out: Vec<String> = self.steps.last().map(|s| s.ct_labels.clone()).unwrap_or_default();
        if let Some(last) = self.steps.last() {
            if last.decision == StepDecision::NotRejected {
                if let Some(l) = &last.min_stat_label {
                    out.push(l.clone());
                }
            }
        }
        out
    }
}

/// Rank estimate at level `alpha`, rejecting when `X* > chi2_1(1 - alpha)`.
pub fn estimate_rank_hualde(panel: &Panel, m: usize, alpha: f64) -> Result<RankTrace> {
    let cv = chi2_critical(alpha)?;
    run(panel, m, cv, Some(alpha))
}

/// Rank estimate with an explicit rejection threshold for every test.
pub fn estimate_rank_hualde_with_threshold(panel: &Panel, m: usize, critical_value: f64) -> Result<RankTrace> {
    if !critical_value.is_finite() {
        return Err(Error::InvalidInput(format!("threshold must be finite, got {critical_value}")));
    }
    run(panel, m, critical_value, None)
}

fn first_max(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn candidate_stat(
    pgrams: &PeriodogramSet,
    memory: &[MemoryEstimate],
    labels: &[String],
    cts: &[usize],
    cand: usize,
) -> CandidateStat {
    let mut cols = cts.to_vec();
    cols.push(cand);
    let sub = pgrams.select(&cols);
    let est: Vec<MemoryEstimate> = cols.iter().map(|&i| memory[i].clone()).collect();
    let lab: Vec<String> = cols.iter().map(|&i| labels[i].clone()).collect();
    match xstar_from_periodogram(&sub, &est, &equal_weights(cols.len()), &lab) {
        Ok(res) => CandidateStat {
            index: cand,
            label: labels[cand].clone(),
            stat: Some(res.x_star),
            failure: None,
            detail: Some(res),
        },
        Err(e) => CandidateStat {
            index: cand,
            label: labels[cand].clone(),
            stat: None,
            failure: Some(e.to_string()),
            detail: None,
        },
    }
}

fn run(panel: &Panel, m: usize, critical_value: f64, alpha: Option<f64>) -> Result<RankTrace> {
    let p = panel.nvars();
    if p < 2 {
        return Err(Error::InvalidInput("rank estimation needs at least two series".into()));
    }
    let labels = panel.labels().to_vec();
    let pgrams = cross_periodogram(panel, m, true)?;
    let memory = column_estimates(&pgrams)?;
    let d_hats: Vec<f64> = memory.iter().map(|e| e.d_hat).collect();

    let mut warnings = Vec::new();
    for (e, l) in memory.iter().zip(&labels) {
        if e.d_hat >= 0.5 {
            warnings.push(format!("`{l}` has d_hat = {:.4} >= 0.5; X* assumes stationary series", e.d_hat));
        }
        if e.at_boundary {
            warnings.push(format!("`{l}` memory estimate {:.4} lies on the search boundary", e.d_hat));
        }
    }

    let mut cts = vec![first_max(&d_hats)];
    let mut steps = Vec::new();
    let mut r_hat = 0;
    for k in 1..p {
        let remaining: Vec<usize> = (0..p).filter(|i| !cts.contains(i)).collect();
        let candidates: Vec<CandidateStat> = remaining
            .par_iter()
            .map(|&c| candidate_stat(&pgrams, &memory, &labels, &cts, c))
            .collect();
        for c in &candidates {
            if let Some(f) = &c.failure {
                warnings.push(format!("step {k}: X* with candidate `{}` failed ({f}); counted as not rejected", c.label));
            }
        }
        let mut min_pos: Option<usize> = None;
        for (pos, c) in candidates.iter().enumerate() {
            if let Some(s) = c.stat {
                if min_pos.is_none_or(|b| s < candidates[b].stat.expect("computed")) {
                    min_pos = Some(pos);
                }
            }
        }
        let mut record = StepRecord {
            step: k,
            ct_indices: cts.clone(),
            ct_labels: cts.iter().map(|&i| labels[i].clone()).collect(),
            min_stat_index: min_pos.map(|b| candidates[b].index),
            min_stat_label: min_pos.map(|b| candidates[b].label.clone()),
            candidates,
            decision: StepDecision::NotRejected,
        };
        record.decision = record.decide(critical_value);
        let rejected = record.decision == StepDecision::Rejected;
        let next = record.min_stat_index.unwrap_or(remaining[0]);
        steps.push(record);
        if rejected {
            r_hat = p - k;
            break;
        }
        cts.push(next);
    }

    Ok(RankTrace { steps, r_hat, alpha, critical_value, m, labels, d_hats, memory, warnings })
}
