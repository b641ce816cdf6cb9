//! Distribution of the certified height of destruction over growing
//! windows.

use serde::{Deserialize, Serialize};

use super::stats::{quantile, QuantileEstimate};
use super::streams;
use crate::clocks::{derive_seed, PoissonClocks};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::firesim::certified_height_with;
use crate::lattice::{Region, Window, SQRT3_2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightConfig {
    pub region: Region,
    /// Window heights, in rows.
    pub heights: Vec<i32>,
    pub samples: u64,
    pub seed: u64,
    /// Horizontal clearance beside the region, as a fraction of the height.
    pub margin: f64,
    /// Only rows up to this one are evaluated; defaults to the window top.
    pub eval_rows: Option<i32>,
}

impl HeightConfig {
    pub fn new(region: Region, heights: Vec<i32>, samples: u64, seed: u64) -> Self {
        Self { region, heights, samples, seed, margin: 0.5, eval_rows: None }
    }
}

/// Half-plane window of `height` rows holding the region's cross-section
/// with `margin · height` to spare on both sides.
pub fn region_window(region: &Region, height: i32, margin: f64) -> Result<Window> {
    if height < 1 || !(margin >= 0.0) {
        return Err(Error::InvalidParameter("window height must be positive and margin non-negative".into()));
    }
    let h = height as f64;
    let y = h * SQRT3_2;
    let m = margin * h + 1.0;
    let (lo, hi) = match region {
        Region::Cone(c) => {
            let half = y / c.phi.tan();
            (c.apex_x - half, c.apex_x + half)
        }
        Region::Tube(t) => {
            let top = t.x + y / t.phi.tan();
            (t.x.min(top), t.x.max(top))
        }
        Region::Everything => (-h, h),
    };
    // Axial k = x - l/2 ranges over [x - h/2, x] for rows 0..=height.
    Window::half_plane((lo - m - h / 2.0).floor() as i32, (hi + m).ceil() as i32, height)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightSample {
    pub height: f64,
    pub upper_bound: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightDistribution {
    pub window_height: i32,
    pub window: Window,
    pub uncertified_fraction: f64,
    pub median: QuantileEstimate,
    pub p90: QuantileEstimate,
    /// `(value, fraction ≤ value)` at each distinct certified height.
    pub ecdf: Vec<(f64, f64)>,
    pub samples: Vec<HeightSample>,
}

fn ecdf(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = f,
            _ => out.push((v, f)),
        }
    }
    out
}

/// Certified heights for each window size. Sample `i` uses the same clock
/// field in every window, so the windows are nested realisations.
pub fn height_distribution(config: &HeightConfig, exec: Execution) -> Result<Vec<HeightDistribution>> {
    if config.samples == 0 || config.heights.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample and one window height".into()));
    }
    config
        .heights
        .iter()
        .map(|&h| {
            let window = region_window(&config.region, h, config.margin)?;
            let samples = exec
                .map(config.samples as usize, |i| {
                    let clocks = PoissonClocks::new(derive_seed(config.seed, streams::HEIGHTS, i as u64));
                    certified_height_with(&window, clocks, &config.region, config.eval_rows).map(|c| HeightSample {
                        height: c.height,
                        upper_bound: c.upper_bound,
                        certified: c.certified,
                    })
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let mut values: Vec<f64> = samples.iter().map(|s| s.height).collect();
            values.sort_by(f64::total_cmp);
            let uncertified = samples.iter().filter(|s| !s.certified).count();
            Ok(HeightDistribution {
                window_height: h,
                window,
                uncertified_fraction: uncertified as f64 / samples.len() as f64,
                median: quantile(&values, 0.5)?,
                p90: quantile(&values, 0.9)?,
                ecdf: ecdf(&values),
                samples,
            })
        })
        .collect()
}
