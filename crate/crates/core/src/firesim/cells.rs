//! Fire cells: clusters of the growth process at the critical time together
//! with their outer boundary.
//!
//! Since the fire state never exceeds the growth state, no fire can cross a
//! site that is still vacant at `t_c`. The process therefore factorises over
//! cells, and a cell whose closure stays clear of the window edge evolves
//! exactly as it would in the infinite half-plane.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{run_with, DestructionRecord, Domain, RunOptions};
use crate::clocks::{ClockSource, PoissonClocks, T_C};
use crate::error::{Error, Result};
use crate::lattice::{outer_boundary, Region, SiteCoord, Window};
use crate::percolation::{sample_configuration_with, GrowthConfiguration};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FireCell {
    /// Sites of one interior cluster, sorted by `(l, k)`.
    pub core: Vec<SiteCoord>,
    /// Core plus outer boundary, sorted by `(l, k)`.
    pub closure: Vec<SiteCoord>,
    pub certified: bool,
}

impl FireCell {
    /// Whether some boundary-row site can ignite the cell.
    pub fn has_igniter(&self) -> bool {
        self.closure.first().is_some_and(|s| s.l == 0)
    }

    pub fn max_l_in(&self, region: &Region, max_row: i32) -> Option<i32> {
        self.core.iter().filter(|s| s.l <= max_row && region.contains(**s)).map(|s| s.l).max()
    }
}

/// Splits the interior of a half-plane configuration into fire cells.
pub fn decompose_configuration(config: &GrowthConfiguration) -> Result<Vec<FireCell>> {
    let window = config.window;
    if !window.is_half_plane() {
        return Err(Error::InvalidParameter("fire cells live on half-plane windows".into()));
    }
    let mut seen = vec![false; window.len()];
    let mut cells = Vec::new();
    let mut stack = Vec::new();
    for (i, s) in window.sites().enumerate() {
        if s.l == 0 || seen[i] || !config.is_occupied(s) {
            continue;
        }
        seen[i] = true;
        stack.push(s);
        let mut core = Vec::new();
        while let Some(v) = stack.pop() {
            core.push(v);
            for u in v.neighbors() {
                if u.l >= 1 && config.is_occupied(u) {
                    let j = window.index(u).expect("occupied sites lie in the window");
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(u);
                    }
                }
            }
        }
        let boundary = outer_boundary(&core, true);
        let certified = boundary.iter().chain(&core).all(|&s| window.contains(s) && !window.is_edge(s));
        let mut closure: Vec<SiteCoord> = boundary.into_iter().chain(core.iter().copied()).collect();
        closure.sort_by_key(|s| (s.l, s.k));
        core.sort_by_key(|s| (s.l, s.k));
        cells.push(FireCell { core, closure, certified });
    }
    Ok(cells)
}

pub fn decompose_cells_with<C: ClockSource + ?Sized>(window: &Window, clocks: &C) -> Result<Vec<FireCell>> {
    decompose_configuration(&sample_configuration_with(*window, T_C, clocks, true)?)
}

/// Fire cells of `σ_{t_c}` on a half-plane window.
pub fn decompose_cells(window: &Window, seed: u64) -> Result<Vec<FireCell>> {
    decompose_cells_with(window, &PoissonClocks::new(seed))
}

/// Runs the process on one certified cell, with its boundary-row sites as
/// the only igniters.
pub fn run_cell<C: ClockSource>(cell: &FireCell, clocks: C, t_end: f64) -> Result<Vec<DestructionRecord>> {
    if !cell.certified {
        return Err(Error::UncertifiedCell);
    }
    if !cell.has_igniter() {
        RunOptions::new(t_end)?;
        return Ok(Vec::new());
    }
    let domain = Domain::from_sites(cell.closure.iter().copied())?;
    Ok(run_with(domain, clocks, RunOptions::new(t_end)?, &mut ())?.1)
}

/// Height of destruction at `t_c` over a region, assembled from fire cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedHeight {
    /// Height reached by fires inside certified cells.
    pub height: f64,
    /// True when no uncertified cell could raise the height: each of them
    /// has no region site above `height` in the evaluated rows.
    pub certified: bool,
    /// Largest height any cell could contribute; equals `height` when
    /// certified.
    pub upper_bound: f64,
    pub uncertified_cells: usize,
}

/// Certified height over `region` for rows up to `max_row` (default: the
/// window's top row).
pub fn certified_height_with<C: ClockSource + Copy>(
    window: &Window,
    clocks: C,
    region: &Region,
    max_row: Option<i32>,
) -> Result<CertifiedHeight> {
    let max_row = max_row.unwrap_or(window.l_max).min(window.l_max);
    let cells = decompose_cells_with(window, &clocks)?;
    let mut certified_l: Option<i32> = None;
    let mut pending = BTreeSet::new();
    for cell in &cells {
        let Some(reach) = cell.max_l_in(region, max_row) else { continue };
        if !cell.certified {
            pending.insert(reach);
            continue;
        }
        if !cell.has_igniter() {
            continue;
        }
        // Full site lists are needed here, whatever their size.
        let domain = Domain::from_sites(cell.closure.iter().copied())?;
        let opts = RunOptions { site_cap: usize::MAX, ..RunOptions::default() };
        for rec in run_with(domain, clocks, opts, &mut ())?.1 {
            let sites = rec.sites.unwrap_or_default();
            let l = sites.iter().filter(|s| s.l <= max_row && region.contains(**s)).map(|s| s.l).max();
            certified_l = certified_l.max(l);
        }
    }
    Ok(assemble(certified_l, &pending))
}

fn assemble(certified_l: Option<i32>, pending: &BTreeSet<i32>) -> CertifiedHeight {
    let im = |l: Option<i32>| l.map_or(0.0, |l| SiteCoord::new(0, l).im_height());
    let worst = pending.last().copied();
    let blocked = pending.iter().filter(|&&l| Some(l) > certified_l).count();
    CertifiedHeight {
        height: im(certified_l),
        certified: blocked == 0,
        upper_bound: im(certified_l.max(worst)),
        uncertified_cells: blocked,
    }
}

/// Certified cone or tube height at `t_c` for one seed.
pub fn certified_height(window: &Window, seed: u64, region: &Region) -> Result<CertifiedHeight> {
    certified_height_with(window, PoissonClocks::new(seed), region, None)
}
