//! Interval estimates and least-squares fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Two-sided confidence level used throughout.
pub const CONFIDENCE: f64 = 0.95;

fn normal_quantile(level: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + level / 2.0)
}

fn student_quantile(level: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom").inverse_cdf(0.5 + level / 2.0)
}

/// A probability estimate with its confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub point: f64,
    pub n_samples: u64,
    /// Number of samples (or surviving particles) that saw the event.
    pub successes: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EstimateResult {
    /// Bernoulli proportion with a Wilson score interval.
    pub fn wilson(successes: u64, n_samples: u64) -> Self {
        Self::wilson_at(successes, n_samples, CONFIDENCE)
    }

    pub fn wilson_at(successes: u64, n_samples: u64, level: f64) -> Self {
        assert!(n_samples > 0 && successes <= n_samples);
        let n = n_samples as f64;
        let p = successes as f64 / n;
        let z = normal_quantile(level);
        let z2 = z * z;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            point: p,
            n_samples,
            successes,
            ci_low: (centre - half).max(0.0).min(p),
            ci_high: (centre + half).min(1.0).max(p),
        }
    }

    /// Mean of independent unbiased replicate estimates with a Student-t
    /// interval.
    pub fn from_replicates(values: &[f64], n_samples: u64, successes: u64) -> Self {
        let r = values.len();
        assert!(r >= 2, "need at least two replicates");
        let mean = values.iter().sum::<f64>() / r as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
        let half = student_quantile(CONFIDENCE, (r - 1) as f64) * (var / r as f64).sqrt();
        Self { point: mean, n_samples, successes, ci_low: (mean - half).max(0.0), ci_high: (mean + half).min(1.0) }
    }

    /// Standard error implied by the interval width.
    pub fn std_error(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * normal_quantile(CONFIDENCE))
    }

    /// Plain binomial standard error of the point estimate.
    pub fn binomial_std_error(&self) -> f64 {
        (self.point * (1.0 - self.point) / self.n_samples as f64).sqrt()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Linear,
    Log,
}

impl Transform {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Transform::Linear => v,
            Transform::Log => v.ln(),
        }
    }
}

/// Ordinary least squares `y = intercept + slope · x` on transformed data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci: (f64, f64),
    pub slope_std_error: f64,
    pub r_squared: f64,
    pub residual_norm: f64,
    pub points: usize,
    pub x_transform: Transform,
    pub y_transform: Transform,
}

impl FitResult {
    pub fn fit(xs: &[f64], ys: &[f64], x_transform: Transform, y_transform: Transform) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidParameter("x and y lengths differ".into()));
        }
        if xs.len() < 2 {
            return Err(Error::DegenerateFit("need at least two points".into()));
        }
        let x: Vec<f64> = xs.iter().map(|&v| x_transform.apply(v)).collect();
        let y: Vec<f64> = ys.iter().map(|&v| y_transform.apply(v)).collect();
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateFit("non-finite value after transform".into()));
        }
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::DegenerateFit("all x values coincide".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - rss / syy };
        let (slope_std_error, slope_ci) = if x.len() > 2 {
            let se = (rss / (n - 2.0) / sxx).sqrt();
            let q = student_quantile(CONFIDENCE, n - 2.0);
            (se, (slope - q * se, slope + q * se))
        } else {
            (f64::INFINITY, (f64::NEG_INFINITY, f64::INFINITY))
        };
        Ok(Self {
            slope,
            intercept,
            slope_ci,
            slope_std_error,
            r_squared,
            residual_norm: rss.sqrt(),
            points: x.len(),
            x_transform,
            y_transform,
        })
    }
}

/// Empirical quantile (lower order statistic) with a distribution-free
/// interval from binomial order statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub q: f64,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl QuantileEstimate {
    pub fn overlaps(&self, other: &QuantileEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

pub fn quantile(sorted: &[f64], q: f64) -> Result<QuantileEstimate> {
    let n = sorted.len();
    if n == 0 || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter("quantile needs data and q in [0, 1]".into()));
    }
    let at = |rank: u64| sorted[(rank as usize).clamp(1, n) - 1];
    let rank = ((q * n as f64).ceil() as u64).max(1);
    let b = Binomial::new(q, n as u64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let alpha = (1.0 - CONFIDENCE) / 2.0;
    // Ranks j with P[Bin(n, q) < j] ≤ α and P[Bin(n, q) < k] ≥ 1 − α.
    let lo = b.inverse_cdf(alpha);
    let hi = b.inverse_cdf(1.0 - alpha) + 1;
    Ok(QuantileEstimate { q, value: at(rank), ci_low: at(lo), ci_high: at(hi) })
}
