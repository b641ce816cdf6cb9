//! Event-driven forest-fire dynamics on finite pieces of the half-plane.
//!
//! Interior sites (l ≥ 1) grow a tree at a ring of their clock if vacant.
//! Boundary sites (l = 0) are never occupied; a ring there burns every
//! occupied cluster adjacent to the ringing site, instantly. Only two kinds
//! of events are ever queued: the next relevant jump of each vacant interior
//! site, and every jump of each boundary site.

pub mod audit;
mod cells;
mod export;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

pub use cells::{
    certified_height, certified_height_with, decompose_cells, decompose_cells_with, decompose_configuration, run_cell,
    CertifiedHeight, FireCell,
};
pub use export::{write_log_csv, LogRow, RunSummary};

use crate::clocks::{ClockSource, PoissonClocks, T_C};
use crate::error::{Error, Result};
use crate::lattice::{Region, SiteCoord, Window, NEIGHBOR_OFFSETS};

/// Destroyed-site lists longer than this are kept only as summaries.
pub const DEFAULT_SITE_CAP: usize = 10_000;

const NONE: u32 = u32::MAX;

/// The sites a run lives on, with a precomputed neighbour table.
#[derive(Clone, Debug)]
pub struct Domain {
    sites: Vec<SiteCoord>,
    nbr: Vec<[u32; 6]>,
    lookup: HashMap<SiteCoord, u32>,
}

impl Domain {
    /// All sites of a half-plane window.
    pub fn from_window(window: &Window) -> Result<Self> {
        if !window.is_half_plane() {
            return Err(Error::InvalidParameter("forest fires run on half-plane windows".into()));
        }
        Self::from_sites(window.sites())
    }

    /// An arbitrary finite set of half-plane sites; sites are sorted so the
    /// run does not depend on the order they are given in.
    pub fn from_sites(sites: impl IntoIterator<Item = SiteCoord>) -> Result<Self> {
        let mut sites: Vec<SiteCoord> = sites.into_iter().collect();
        sites.sort_by_key(|s| (s.l, s.k));
        sites.dedup();
        if let Some(s) = sites.iter().find(|s| s.l < 0) {
            return Err(Error::InvalidParameter(format!("site {s} lies below the boundary row")));
        }
        let lookup: HashMap<SiteCoord, u32> = sites.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
        let nbr = sites
            .iter()
            .map(|s| {
                let mut row = [NONE; 6];
                for (slot, (dk, dl)) in row.iter_mut().zip(NEIGHBOR_OFFSETS) {
                    *slot = lookup.get(&s.offset(dk, dl)).copied().unwrap_or(NONE);
                }
                row
            })
            .collect();
        Ok(Self { sites, nbr, lookup })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[SiteCoord] {
        &self.sites
    }

    pub fn index(&self, s: SiteCoord) -> Option<usize> {
        self.lookup.get(&s).map(|&i| i as usize)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.nbr[i].iter().filter(|&&j| j != NONE).map(|&j| j as usize)
    }
}

/// Run parameters beyond the domain and clocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_end: f64,
    /// Regions whose per-record maximum height is kept even when the site
    /// list is dropped.
    pub tracked: Vec<Region>,
    pub site_cap: usize,
}

impl RunOptions {
    pub fn new(t_end: f64) -> Result<Self> {
        if !(t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {t_end}")));
        }
        if t_end > T_C {
            return Err(Error::BeyondCriticalTime(t_end));
        }
        Ok(Self { t_end, tracked: Vec::new(), site_cap: DEFAULT_SITE_CAP })
    }

    pub fn tracking(mut self, region: Region) -> Self {
        self.tracked.push(region);
        self
    }
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { t_end: T_C, tracked: Vec::new(), site_cap: DEFAULT_SITE_CAP }
    }
}

/// One fire: a single cluster burned by a single boundary ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DestructionRecord {
    pub time: f64,
    pub ignition: SiteCoord,
    pub size: usize,
    /// Largest row index among destroyed sites.
    pub max_l: i32,
    /// Destroyed sites sorted by `(l, k)`, unless there were more than the
    /// run's site cap.
    pub sites: Option<Vec<SiteCoord>>,
    /// Per tracked region, the largest row index destroyed inside it.
    pub tracked_max_l: Vec<Option<i32>>,
}

impl DestructionRecord {
    pub fn max_im(&self) -> f64 {
        SiteCoord::new(0, self.max_l).im_height()
    }

    /// Largest row index destroyed inside `region`, if it can be told from
    /// the record. `tracked` lists the regions the run tracked.
    pub fn max_l_in(&self, region: &Region, tracked: &[Region]) -> Option<Option<i32>> {
        if let Some(sites) = &self.sites {
            return Some(sites.iter().filter(|s| region.contains(**s)).map(|s| s.l).max());
        }
        tracked.iter().position(|r| r == region).map(|i| self.tracked_max_l[i])
    }
}

/// Height up to which sites of `region` were destroyed by time `t`; 0 when
/// nothing was. Compressed records count through their tracked summary; a
/// compressed record that did not track `region` contributes its overall
/// maximum, an upper bound.
pub fn height_of_destruction(log: &[DestructionRecord], region: &Region, t: f64, tracked: &[Region]) -> f64 {
    log.iter()
        .filter(|r| r.time <= t)
        .filter_map(|r| r.max_l_in(region, tracked).unwrap_or(Some(r.max_l)))
        .max()
        .map_or(0.0, |l| SiteCoord::new(0, l).im_height())
}

/// Hooks into a run, called synchronously as events are processed.
pub trait FireObserver {
    fn on_growth(&mut self, _t: f64, _site: usize, _sim: &FireState) {}
    /// Called after the cluster `burned` (domain indices) has been vacated.
    fn on_destruction(&mut self, _record: &DestructionRecord, _burned: &[usize], _sim: &FireState) {}
}

impl FireObserver for () {}

/// Mutable state of a run.
#[derive(Clone, Debug)]
pub struct FireState {
    pub domain: Domain,
    pub occupied: Vec<bool>,
    pub time: f64,
}

impl FireState {
    pub fn is_occupied(&self, s: SiteCoord) -> bool {
        self.domain.index(s).is_some_and(|i| self.occupied[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct EventKey {
    time: f64,
    l: i32,
    k: i32,
    site: u32,
}

impl Eq for EventKey {}

impl Ord for EventKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time.total_cmp(&other.time).then(self.l.cmp(&other.l)).then(self.k.cmp(&other.k))
    }
}

impl PartialOrd for EventKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A forest-fire run that can be advanced in steps.
pub struct FireSim<C> {
    state: FireState,
    clocks: C,
    opts: RunOptions,
    queue: BinaryHeap<Reverse<EventKey>>,
    log: Vec<DestructionRecord>,
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
}

impl<C: ClockSource> FireSim<C> {
    pub fn new(domain: Domain, clocks: C, opts: RunOptions) -> Result<Self> {
        RunOptions::new(opts.t_end)?;
        let n = domain.len();
        let mut queue = BinaryHeap::new();
        for (i, &s) in domain.sites.iter().enumerate() {
            let first = clocks.first_arrival(s);
            if first <= opts.t_end {
                queue.push(Reverse(EventKey { time: first, l: s.l, k: s.k, site: i as u32 }));
            }
        }
        Ok(Self {
            state: FireState { domain, occupied: vec![false; n], time: 0.0 },
            clocks,
            opts,
            queue,
            log: Vec::new(),
            stamp: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
        })
    }

    pub fn state(&self) -> &FireState {
        &self.state
    }

    pub fn log(&self) -> &[DestructionRecord] {
        &self.log
    }

    pub fn options(&self) -> &RunOptions {
        &self.opts
    }

    pub fn clocks(&self) -> &C {
        &self.clocks
    }

    pub fn into_parts(self) -> (FireState, Vec<DestructionRecord>) {
        (self.state, self.log)
    }

    /// Processes every event with time `<= t` (capped at the horizon).
    pub fn advance_to<O: FireObserver + ?Sized>(&mut self, t: f64, observer: &mut O) {
        let t = t.min(self.opts.t_end);
        while let Some(&Reverse(ev)) = self.queue.peek() {
            if ev.time > t {
                break;
            }
            self.queue.pop();
            self.state.time = ev.time;
            if ev.l == 0 {
                self.ring_boundary(ev, observer);
            } else {
                let i = ev.site as usize;
                debug_assert!(!self.state.occupied[i]);
                self.state.occupied[i] = true;
                observer.on_growth(ev.time, i, &self.state);
            }
        }
        self.state.time = self.state.time.max(t);
    }

    pub fn run_to_end<O: FireObserver + ?Sized>(&mut self, observer: &mut O) {
        self.advance_to(self.opts.t_end, observer);
    }

    fn schedule_after(&mut self, i: usize, after: f64) {
        let s = self.state.domain.sites[i];
        if let Some(t) = self.clocks.next_jump_after(s, after, self.opts.t_end) {
            self.queue.push(Reverse(EventKey { time: t, l: s.l, k: s.k, site: i as u32 }));
        }
    }

    fn ring_boundary<O: FireObserver + ?Sized>(&mut self, ev: EventKey, observer: &mut O) {
        let x = ev.site as usize;
        self.epoch += 1;
        let nbrs = self.state.domain.nbr[x];
        for &v in nbrs.iter().filter(|&&v| v != NONE) {
            let v = v as usize;
            if !self.state.occupied[v] || self.stamp[v] == self.epoch {
                continue;
            }
            let burned = self.collect_cluster(v);
            for &u in &burned {
                self.state.occupied[u] = false;
            }
            let record = self.record(ev.time, self.state.domain.sites[x], &burned);
            observer.on_destruction(&record, &burned, &self.state);
            for &u in &burned {
                self.schedule_after(u, ev.time);
            }
            self.log.push(record);
        }
        self.schedule_after(x, ev.time);
    }

    fn collect_cluster(&mut self, start: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.stamp[start] = self.epoch;
        self.stack.push(start);
        while let Some(v) = self.stack.pop() {
            out.push(v);
            for &u in &self.state.domain.nbr[v] {
                let u = u as usize;
                if u != NONE as usize && self.state.occupied[u] && self.stamp[u] != self.epoch {
                    self.stamp[u] = self.epoch;
                    self.stack.push(u);
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn record(&self, time: f64, ignition: SiteCoord, burned: &[usize]) -> DestructionRecord {
        let sites = burned.iter().map(|&i| self.state.domain.sites[i]);
        let tracked_max_l =
            self.opts.tracked.iter().map(|r| sites.clone().filter(|s| r.contains(*s)).map(|s| s.l).max()).collect();
        DestructionRecord {
            time,
            ignition,
            size: burned.len(),
            max_l: sites.clone().map(|s| s.l).max().unwrap_or(0),
            // Domain indices are (l, k)-sorted, so the list comes out sorted too.
            sites: (burned.len() <= self.opts.site_cap).then(|| sites.collect()),
            tracked_max_l,
        }
    }
}

/// Runs the process on a half-plane window up to `t_end`.
pub fn run(window: &Window, seed: u64, t_end: f64) -> Result<(FireState, Vec<DestructionRecord>)> {
    run_with(Domain::from_window(window)?, PoissonClocks::new(seed), RunOptions::new(t_end)?, &mut ())
}

pub fn run_with<C: ClockSource, O: FireObserver + ?Sized>(
    domain: Domain,
    clocks: C,
    opts: RunOptions,
    observer: &mut O,
) -> Result<(FireState, Vec<DestructionRecord>)> {
    let mut sim = FireSim::new(domain, clocks, opts)?;
    sim.run_to_end(observer);
    Ok(sim.into_parts())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beyond_critical_time_is_rejected() {
        let w = Window::half_plane(-3, 3, 3).unwrap();
        assert!(matches!(run(&w, 1, 0.7), Err(Error::BeyondCriticalTime(_))));
        assert!(run(&w, 1, T_C).is_ok());
        assert!(Domain::from_window(&Window::new(-3, 3, -1, 3).unwrap()).is_err());
    }

    #[test]
    fn quiet_boundary_gives_pure_growth() {
        // Without boundary sites nothing can ignite.
        let w = Window::half_plane(-6, 6, 6).unwrap();
        let interior = Domain::from_sites(w.sites().filter(|s| s.l >= 1)).unwrap();
        let clocks = PoissonClocks::new(8);
        let (state, log) = run_with(interior, clocks, RunOptions::default(), &mut ()).unwrap();
        assert!(log.is_empty());
        for (i, s) in state.domain.sites().iter().enumerate() {
            assert_eq!(state.occupied[i], clocks.first_arrival(*s) <= T_C);
        }
    }

    #[test]
    fn height_of_destruction_examples() {
        let everything = Region::Everything;
        assert_eq!(height_of_destruction(&[], &everything, 1.0, &[]), 0.0);
        let rec = DestructionRecord {
            time: 0.5,
            ignition: SiteCoord::new(2, 0),
            size: 1,
            max_l: 3,
            sites: Some(vec![SiteCoord::new(2, 3)]),
            tracked_max_l: vec![],
        };
        let h = height_of_destruction(std::slice::from_ref(&rec), &everything, 0.6, &[]);
        assert!((h - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(height_of_destruction(std::slice::from_ref(&rec), &everything, 0.4, &[]), 0.0);
    }

    #[test]
    fn boundary_stays_vacant_and_records_are_consistent() {
        let w = Window::half_plane(-10, 10, 10).unwrap();
        for seed in 0..20 {
            let (state, log) = run(&w, seed, T_C).unwrap();
            for (i, s) in state.domain.sites().iter().enumerate() {
                if s.l == 0 {
                    assert!(!state.occupied[i]);
                }
            }
            for r in &log {
                let sites = r.sites.as_ref().unwrap();
                assert_eq!(sites.len(), r.size);
                assert!(sites.iter().any(|s| s.is_neighbor(r.ignition)));
                assert_eq!(r.ignition.l, 0);
            }
            assert!(log.windows(2).all(|p| p[0].time <= p[1].time));
        }
    }
}
