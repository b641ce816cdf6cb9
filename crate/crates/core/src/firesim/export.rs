//! Destruction-log export: one CSV row per fire and a JSON run summary.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{height_of_destruction, DestructionRecord, FireState};
use crate::error::Result;
use crate::lattice::{Region, Window};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub time: f64,
    pub ignition_k: i32,
    pub cluster_size: usize,
    pub max_im: f64,
    pub in_cone: bool,
}

impl LogRow {
    /// `in_cone` is set when the fire destroyed at least one site of `cone`.
    pub fn new(rec: &DestructionRecord, cone: &Region, tracked: &[Region]) -> Self {
        let in_cone = match rec.max_l_in(cone, tracked) {
            Some(l) => l.is_some(),
            None => true,
        };
        Self { time: rec.time, ignition_k: rec.ignition.k, cluster_size: rec.size, max_im: rec.max_im(), in_cone }
    }
}

pub fn write_log_csv<W: Write>(out: W, log: &[DestructionRecord], cone: &Region, tracked: &[Region]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rec in log {
        w.serialize(LogRow::new(rec, cone, tracked))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub window: Window,
    pub seed: u64,
    pub t_end: f64,
    pub fires: usize,
    pub destroyed_sites: usize,
    pub largest_fire: usize,
    pub occupied_at_end: usize,
    pub cone: Region,
    pub cone_height: f64,
    pub overall_height: f64,
}

impl RunSummary {
    pub fn new(
        window: Window,
        seed: u64,
        t_end: f64,
        state: &FireState,
        log: &[DestructionRecord],
        cone: Region,
        tracked: &[Region],
    ) -> Self {
        Self {
            window,
            seed,
            t_end,
            fires: log.len(),
            destroyed_sites: log.iter().map(|r| r.size).sum(),
            largest_fire: log.iter().map(|r| r.size).max().unwrap_or(0),
            occupied_at_end: state.occupied.iter().filter(|&&o| o).count(),
            cone,
            cone_height: height_of_destruction(log, &cone, t_end, tracked),
            overall_height: height_of_destruction(log, &Region::Everything, t_end, tracked),
        }
    }
}
