//! CSV tables and JSON reports for estimator output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::stats::EstimateResult;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub n: u32,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
}

impl EstimateRow {
    pub fn new(n: u32, e: &EstimateResult) -> Self {
        Self { n, point: e.point, ci_low: e.ci_low, ci_high: e.ci_high, samples: e.n_samples }
    }
}

/// Writes `(n, point, ci_low, ci_high, samples)` rows with a header.
pub fn write_estimate_table<W: Write>(out: W, rows: &[EstimateRow]) -> Result<()> {
    write_rows(out, rows)
}

/// Any serialisable rows as CSV with a header.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
