//! Partial sums of per-`n` probabilities and a summability verdict.

use serde::{Deserialize, Serialize};

use super::stats::{EstimateResult, FitResult, Transform};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// The fitted log-log decay is steeper than `n^{-1}`.
    SummableTrend,
    NotSummable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorelCantelliReport {
    pub n_list: Vec<u32>,
    pub partial_sums: Vec<f64>,
    pub upper_partial_sums: Vec<f64>,
    pub fit: FitResult,
    pub verdict: Verdict,
}

/// Cumulative sums of the point estimates and of the upper interval ends,
/// and a log-log fit of the estimates against `n` over the positive ones.
pub fn borel_cantelli_report(n_list: &[u32], probabilities: &[EstimateResult]) -> Result<BorelCantelliReport> {
    if n_list.len() != probabilities.len() || n_list.len() < 3 {
        return Err(Error::InvalidParameter("need at least three (n, estimate) pairs".into()));
    }
    let mut partial_sums = Vec::with_capacity(n_list.len());
    let mut upper_partial_sums = Vec::with_capacity(n_list.len());
    let (mut s, mut u) = (0.0, 0.0);
    for p in probabilities {
        s += p.point;
        u += p.ci_high;
        partial_sums.push(s);
        upper_partial_sums.push(u);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        n_list.iter().zip(probabilities).filter(|(_, p)| p.point > 0.0).map(|(&n, p)| (n as f64, p.point)).unzip();
    let fit = FitResult::fit(&xs, &ys, Transform::Log, Transform::Log)?;
    let verdict = if fit.slope < -1.0 { Verdict::SummableTrend } else { Verdict::NotSummable };
    Ok(BorelCantelliReport { n_list: n_list.to_vec(), partial_sums, upper_partial_sums, fit, verdict })
}
