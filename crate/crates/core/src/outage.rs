//! Link-budget thresholding and outage runs.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSample;
use crate::error::{Error, Result};
use crate::stats::Ecdf;

/// UE receiver sensitivity used by default (dBm).
pub const DEFAULT_SENSITIVITY_DBM: f64 = -84.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub eirp_dbm: f64,
    pub sensitivity_dbm: f64,
    /// Largest tolerable attenuation (dB).
    pub lambda_outage: f64,
}

impl LinkBudget {
    pub fn new(eirp_dbm: f64, sensitivity_dbm: f64) -> Self {
        Self {
            eirp_dbm,
            sensitivity_dbm,
            lambda_outage: outage_threshold(eirp_dbm, sensitivity_dbm),
        }
    }
}

/// `EIRP - sensitivity` (dB).
pub fn outage_threshold(eirp_dbm: f64, sensitivity_dbm: f64) -> f64 {
    eirp_dbm - sensitivity_dbm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageReport {
    /// Fraction of path samples in outage.
    pub outage_probability: f64,
    /// Lengths of contiguous outage stretches (m).
    pub outage_runs: Vec<f64>,
    pub outage_points: usize,
    pub total_points: usize,
}

/// Marks samples whose attenuation strictly exceeds the budget and merges
/// neighbouring ones into runs. Run edges sit halfway between a sample in
/// outage and its neighbour outside, and at the path ends.
pub fn detect_outage(samples: &[ChannelSample], budget: &LinkBudget) -> Result<OutageReport> {
    let ys: Vec<f64> = samples.iter().map(|s| s.y).collect();
    let totals: Vec<f64> = samples.iter().map(|s| s.lambda_total).collect();
    detect_outage_values(&ys, &totals, budget.lambda_outage)
}

/// [`detect_outage`] over bare `(position, attenuation)` columns.
pub fn detect_outage_values(ys: &[f64], attenuation_db: &[f64], lambda_outage: f64) -> Result<OutageReport> {
    if ys.is_empty() {
        return Err(Error::EmptyInput("no channel samples to evaluate"));
    }
    if ys.len() != attenuation_db.len() {
        return Err(Error::InvalidArgument(format!(
            "{} positions for {} attenuation values",
            ys.len(),
            attenuation_db.len()
        )));
    }
    let n = ys.len();
    let edge = |k: usize| -> f64 {
        // boundary between sample k-1 and sample k
        if k == 0 {
            ys[0]
        } else if k == n {
            ys[n - 1]
        } else {
            0.5 * (ys[k - 1] + ys[k])
        }
    };

    let mut runs = Vec::new();
    let mut outage_points = 0;
    let mut run_start: Option<usize> = None;
    // k == n closes a run that reaches the path end
    #[allow(clippy::needless_range_loop)]
    for k in 0..=n {
        let in_outage = k < n && attenuation_db[k] > lambda_outage;
        if in_outage {
            outage_points += 1;
            run_start.get_or_insert(k);
        } else if let Some(start) = run_start.take() {
            runs.push(edge(k) - edge(start));
        }
    }
    Ok(OutageReport {
        outage_probability: outage_points as f64 / n as f64,
        outage_runs: runs,
        outage_points,
        total_points: n,
    })
}

/// Pooled outage-run lengths; may be empty.
pub fn outage_distance_cdf(reports: &[OutageReport]) -> Ecdf {
    Ecdf::new(reports.iter().flat_map(|r| r.outage_runs.iter().copied()).collect())
}
