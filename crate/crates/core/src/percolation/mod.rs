//! The pure growth process: independent site percolation with occupation
//! probability `1 - e^{-t}`, realised through the clock field so that all
//! times are coupled.
//!
//! Connection queries follow the "`w` is connected to `S`" convention: there
//! is an occupied path from a neighbour of `w` to a site within distance 1 of
//! `S`, and the state of `w` itself is never consulted.

mod crossings;
pub mod explore;

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

pub use crossings::{disjoint_crossings, max_disjoint_crossings, PathType};

use crate::clocks::{ClockSource, PoissonClocks};
use crate::error::{Error, Result};
use crate::lattice::{ConeRegion, Point, RhombusSurface, SiteCoord, Window, GEOM_EPS, NEIGHBOR_OFFSETS};

/// Required clearance, in lattice units, between a target and the window edge.
pub const WINDOW_PADDING: f64 = 2.0;

pub(crate) const NONE: u32 = u32::MAX;

/// Occupancy snapshot of the growth process on a finite window.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthConfiguration {
    pub window: Window,
    pub t: f64,
    pub half_plane: bool,
    occupied: Vec<bool>,
}

impl GrowthConfiguration {
    pub fn from_fn(window: Window, t: f64, half_plane: bool, mut f: impl FnMut(SiteCoord) -> bool) -> Self {
        let occupied = window.sites().map(|s| (!half_plane || s.l >= 0) && f(s)).collect();
        Self { window, t, half_plane, occupied }
    }

    pub fn vacant(window: Window, half_plane: bool) -> Self {
        Self::from_fn(window, 0.0, half_plane, |_| false)
    }

    pub fn is_occupied(&self, s: SiteCoord) -> bool {
        self.window.index(s).is_some_and(|i| self.occupied[i])
    }

    pub fn set(&mut self, s: SiteCoord, occupied: bool) {
        if let Some(i) = self.window.index(s) {
            self.occupied[i] = occupied && (!self.half_plane || s.l >= 0);
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn occupied_fraction(&self) -> f64 {
        self.occupied_count() as f64 / self.occupied.len() as f64
    }

    pub fn occupied_sites(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        self.occupied.iter().enumerate().filter(|(_, &o)| o).map(|(i, _)| self.window.site(i))
    }

    pub(crate) fn occupied_slice(&self) -> &[bool] {
        &self.occupied
    }
}

pub fn sample_configuration_with<C: ClockSource + ?Sized>(
    window: Window,
    t: f64,
    clocks: &C,
    half_plane: bool,
) -> Result<GrowthConfiguration> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    Ok(GrowthConfiguration::from_fn(window, t, half_plane, |s| clocks.first_arrival(s) <= t))
}

pub fn sample_configuration(window: Window, t: f64, seed: u64, half_plane: bool) -> Result<GrowthConfiguration> {
    sample_configuration_with(window, t, &PoissonClocks::new(seed), half_plane)
}

/// What a connection query aims at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Target {
    /// The full rhombus surface.
    Surface(RhombusSurface),
    /// The rhombus surface intersected with the closed upper half-plane.
    UpperSurface(RhombusSurface),
    Cone(ConeRegion),
}

impl Target {
    pub fn distance(&self, p: Point) -> f64 {
        match self {
            Target::Surface(r) => r.distance(p),
            Target::UpperSurface(r) => r.distance_upper(p),
            Target::Cone(c) => c.distance(p),
        }
    }

    /// Sites within distance 1 count as reaching the target.
    pub fn is_reached_by(&self, s: SiteCoord) -> bool {
        self.distance(s.point()) <= 1.0 + GEOM_EPS
    }

    /// Checks that every site the query could need lies in the window with
    /// `WINDOW_PADDING` to spare.
    fn check_window(&self, w: SiteCoord, window: &Window, half_plane: bool) -> Result<()> {
        let need = |s: SiteCoord, what: &str| -> Result<()> {
            if (half_plane && s.l < 0) || window.contains(s) {
                Ok(())
            } else {
                Err(Error::WindowTooSmall { site: s, context: what.to_string() })
            }
        };
        let pad = WINDOW_PADDING.ceil() as i32 + 1;
        for dk in -pad..=pad {
            for dl in -pad..=pad {
                let s = w.offset(dk, dl);
                if s.point().dist(w.point()) <= WINDOW_PADDING + GEOM_EPS {
                    need(s, "padding around the source site")?;
                }
            }
        }
        match self {
            Target::Surface(r) | Target::UpperSurface(r) => {
                let bbox = Window::bounding(&r.corners(), WINDOW_PADDING + 2.0)?;
                for s in bbox.sites() {
                    if r.distance_solid(s.point()) <= WINDOW_PADDING + GEOM_EPS {
                        need(s, "padding around the rhombus")?;
                    }
                }
                Ok(())
            }
            Target::Cone(_) => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct TimeKey(f64);

impl PartialEq for TimeKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TimeKey {}

impl PartialOrd for TimeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// A connection query with its geometry resolved once: window, neighbour
/// table, source sites and target mask. Per-sample work only touches the
/// clock field and a reusable [`Scratch`].
#[derive(Clone, Debug)]
pub struct ConnectionQuery {
    window: Window,
    half_plane: bool,
    source: SiteCoord,
    target: Target,
    sources: Vec<u32>,
    nbr: Vec<[u32; 6]>,
    target_mask: Vec<bool>,
}

impl ConnectionQuery {
    pub fn new(source: SiteCoord, target: Target, window: Window, half_plane: bool) -> Result<Self> {
        target.check_window(source, &window, half_plane)?;
        let allowed = |s: SiteCoord| window.contains(s) && (!half_plane || s.l >= 0) && s != source;
        let index = |s: SiteCoord| window.index(s).map(|i| i as u32).unwrap_or(NONE);
        let mut nbr = Vec::with_capacity(window.len());
        let mut target_mask = Vec::with_capacity(window.len());
        for s in window.sites() {
            let mut row = [NONE; 6];
            if allowed(s) {
                for (slot, (dk, dl)) in row.iter_mut().zip(NEIGHBOR_OFFSETS) {
                    let v = s.offset(dk, dl);
                    if allowed(v) {
                        *slot = index(v);
                    }
                }
            }
            nbr.push(row);
            target_mask.push(allowed(s) && target.is_reached_by(s));
        }
        let sources = source.neighbors().into_iter().filter(|&v| allowed(v)).map(index).collect();
        Ok(Self { window, half_plane, source, target, sources, nbr, target_mask })
    }

    /// The one-arm query from the origin to `S^φ_n(0)` (intersected with the
    /// upper half-plane in half-plane mode), on a window padded beyond the
    /// rhombus.
    pub fn one_arm(n: u32, phi: f64, half_plane: bool) -> Result<Self> {
        Self::rhombus(SiteCoord::ORIGIN, n, phi, half_plane)
    }

    /// Connection from `center` to the surface of the rhombus of radius `n`
    /// around it.
    pub fn rhombus(center: SiteCoord, n: u32, phi: f64, half_plane: bool) -> Result<Self> {
        let r = RhombusSurface::new(center, n, phi)?;
        let mut window = Window::bounding(&r.corners(), WINDOW_PADDING + 2.0)?;
        let target = if half_plane {
            window = window.upper()?;
            Target::UpperSurface(r)
        } else {
            Target::Surface(r)
        };
        Self::new(center, target, window, half_plane)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn source(&self) -> SiteCoord {
        self.source
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn half_plane(&self) -> bool {
        self.half_plane
    }

    pub fn len(&self) -> usize {
        self.nbr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nbr.is_empty()
    }

    pub fn new_scratch(&self) -> Scratch {
        Scratch::new(self.len())
    }

    /// Connection in a given configuration.
    pub fn is_connected(&self, config: &GrowthConfiguration) -> Result<bool> {
        if config.window != self.window {
            return Err(Error::InvalidParameter("configuration window differs from query window".into()));
        }
        let occ = config.occupied_slice();
        let mut scratch = self.new_scratch();
        Ok(self.bfs(&mut scratch, |i| occ[i as usize]))
    }

    /// Connection in the growth process at time `t`, sampling only the sites
    /// the search visits.
    pub fn connected_at<C: ClockSource + ?Sized>(&self, clocks: &C, t: f64, scratch: &mut Scratch) -> bool {
        scratch.begin();
        let window = self.window;
        self.bfs(scratch, |i| clocks.first_arrival(window.site(i as usize)) <= t)
    }

    fn bfs(&self, scratch: &mut Scratch, mut occupied: impl FnMut(u32) -> bool) -> bool {
        scratch.begin();
        scratch.queue.clear();
        for &s in &self.sources {
            if scratch.mark(s) && occupied(s) {
                if self.target_mask[s as usize] {
                    return true;
                }
                scratch.queue.push_back(s);
            }
        }
        while let Some(v) = scratch.queue.pop_front() {
            for &u in &self.nbr[v as usize] {
                if u != NONE && scratch.mark(u) && occupied(u) {
                    if self.target_mask[u as usize] {
                        return true;
                    }
                    scratch.queue.push_back(u);
                }
            }
        }
        false
    }

    /// Smallest `t <= t_max` at which the connection holds, found by growing
    /// the invaded region from the sources in order of arrival time. The
    /// answer is the minimax arrival over all admissible paths.
    pub fn first_connection_time<C: ClockSource + ?Sized>(
        &self,
        clocks: &C,
        t_max: f64,
        scratch: &mut Scratch,
    ) -> Option<f64> {
        scratch.begin();
        let heap = &mut scratch.heap;
        heap.clear();
        let arrival = |i: u32| clocks.first_arrival(self.window.site(i as usize));
        for &s in &self.sources {
            if scratch.seen[s as usize] != scratch.epoch {
                scratch.seen[s as usize] = scratch.epoch;
                heap.push(Reverse((TimeKey(arrival(s)), s)));
            }
        }
        let mut level = 0.0f64;
        while let Some(Reverse((TimeKey(a), v))) = heap.pop() {
            if a > t_max {
                return None;
            }
            level = level.max(a);
            if self.target_mask[v as usize] {
                return Some(level);
            }
            for &u in &self.nbr[v as usize] {
                if u != NONE && scratch.seen[u as usize] != scratch.epoch {
                    scratch.seen[u as usize] = scratch.epoch;
                    heap.push(Reverse((TimeKey(arrival(u)), u)));
                }
            }
        }
        None
    }

    /// Same quantity as [`first_connection_time`](Self::first_connection_time),
    /// computed by inserting sites in arrival order into a union-find with
    /// virtual source and target terminals.
    pub fn first_connection_time_union_find<C: ClockSource + ?Sized>(&self, clocks: &C, t_max: f64) -> Option<f64> {
        let order = ArrivalOrder::build(self, clocks, t_max);
        let n = self.len();
        let (src, tgt) = (n, n + 1);
        let mut dsu = DisjointSets::new(n + 2);
        let mut active = vec![false; n];
        let mut is_source = vec![false; n];
        for &s in &self.sources {
            is_source[s as usize] = true;
        }
        for &(t, v) in order.entries() {
            let vi = v as usize;
            active[vi] = true;
            if is_source[vi] {
                dsu.union(vi, src);
            }
            if self.target_mask[vi] {
                dsu.union(vi, tgt);
            }
            for &u in &self.nbr[vi] {
                if u != NONE && active[u as usize] {
                    dsu.union(vi, u as usize);
                }
            }
            if dsu.find(src) == dsu.find(tgt) {
                return Some(t);
            }
        }
        None
    }
}

/// Sites of a query window sorted by first arrival, keeping only arrivals up
/// to the horizon. A prefix cut at `t` is the occupied set at time `t`.
#[derive(Clone, Debug)]
pub struct ArrivalOrder {
    entries: Vec<(f64, u32)>,
}

impl ArrivalOrder {
    pub fn build<C: ClockSource + ?Sized>(query: &ConnectionQuery, clocks: &C, horizon: f64) -> Self {
        let mut entries: Vec<(f64, u32)> = (0..query.len() as u32)
            .filter(|&i| query.nbr[i as usize] != [NONE; 6] || query.sources.contains(&i))
            .map(|i| (clocks.first_arrival(query.window.site(i as usize)), i))
            .filter(|&(t, _)| t <= horizon)
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Self { entries }
    }

    pub fn entries(&self) -> &[(f64, u32)] {
        &self.entries
    }

    pub fn occupied_prefix(&self, t: f64) -> &[(f64, u32)] {
        let cut = self.entries.partition_point(|&(a, _)| a <= t);
        &self.entries[..cut]
    }
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        a
    }

    /// Detaches `x` into a singleton. Only sound when every member of its
    /// set is reset together.
    pub fn reset(&mut self, x: usize) {
        self.parent[x] = x as u32;
        self.size[x] = 1;
    }
}

/// Reusable per-worker buffers. Visit marks are epoch stamped so a fresh
/// sample costs nothing to clear.
#[derive(Clone, Debug)]
pub struct Scratch {
    seen: Vec<u32>,
    epoch: u32,
    queue: VecDeque<u32>,
    heap: BinaryHeap<Reverse<(TimeKey, u32)>>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Self { seen: vec![0; n], epoch: 0, queue: VecDeque::new(), heap: BinaryHeap::new() }
    }

    fn begin(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen.fill(0);
            self.epoch = 1;
        }
    }

    /// Marks `i` and reports whether it was unmarked.
    fn mark(&mut self, i: u32) -> bool {
        let slot = &mut self.seen[i as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }
}

/// Whether `w` is connected to `target` in `config`.
pub fn is_connected(w: SiteCoord, target: Target, config: &GrowthConfiguration) -> Result<bool> {
    ConnectionQuery::new(w, target, config.window, config.half_plane)?.is_connected(config)
}

pub fn first_connection_time<C: ClockSource + ?Sized>(
    w: SiteCoord,
    target: Target,
    window: Window,
    clocks: &C,
    t_max: f64,
    half_plane: bool,
) -> Result<Option<f64>> {
    let q = ConnectionQuery::new(w, target, window, half_plane)?;
    Ok(q.first_connection_time(clocks, t_max, &mut q.new_scratch()))
}

/// One Bernoulli sample of the one-arm event from the origin.
pub fn one_arm_indicator(n: u32, t: f64, phi: f64, seed: u64, half_plane: bool) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let q = ConnectionQuery::one_arm(n, phi, half_plane)?;
    Ok(q.connected_at(&PoissonClocks::new(seed), t, &mut q.new_scratch()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clocks::T_C;
    use std::f64::consts::PI;

    #[test]
    fn vacant_and_full_configurations() {
        let q = ConnectionQuery::one_arm(4, PI / 3.0, false).unwrap();
        let empty = GrowthConfiguration::vacant(*q.window(), false);
        assert!(!q.is_connected(&empty).unwrap());
        let full = GrowthConfiguration::from_fn(*q.window(), 1.0, false, |_| true);
        assert!(q.is_connected(&full).unwrap());
    }

    #[test]
    fn time_zero_is_vacant() {
        let c = sample_configuration(Window::half_plane(-5, 5, 5).unwrap(), 0.0, 3, true).unwrap();
        assert_eq!(c.occupied_count(), 0);
        assert!(!one_arm_indicator(3, 0.0, PI / 3.0, 11, true).unwrap());
    }

    #[test]
    fn small_window_is_rejected() {
        let r = RhombusSurface::new(SiteCoord::ORIGIN, 5, PI / 3.0).unwrap();
        let w = Window::new(-6, 6, -6, 6).unwrap();
        let err = ConnectionQuery::new(SiteCoord::ORIGIN, Target::Surface(r), w, false).unwrap_err();
        assert!(matches!(err, Error::WindowTooSmall { .. }));
        let w = Window::new(-9, 9, -9, 9).unwrap();
        assert!(ConnectionQuery::new(SiteCoord::ORIGIN, Target::Surface(r), w, false).is_ok());
    }

    #[test]
    fn single_site_path_time() {
        // With n = 1 every neighbour of the origin is already within reach.
        let q = ConnectionQuery::one_arm(1, PI / 3.0, false).unwrap();
        let clocks = PoissonClocks::new(77);
        let want =
            SiteCoord::ORIGIN.neighbors().into_iter().map(|s| clocks.first_arrival(s)).fold(f64::INFINITY, f64::min);
        let got = q.first_connection_time(&clocks, 100.0, &mut q.new_scratch()).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn invasion_matches_union_find() {
        for half in [false, true] {
            let q = ConnectionQuery::one_arm(6, 1.1, half).unwrap();
            let mut scratch = q.new_scratch();
            for seed in 0..300 {
                let c = PoissonClocks::new(seed);
                assert_eq!(
                    q.first_connection_time(&c, T_C, &mut scratch),
                    q.first_connection_time_union_find(&c, T_C),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn lazy_search_matches_materialised_configuration() {
        let q = ConnectionQuery::one_arm(7, PI / 3.0, true).unwrap();
        let mut scratch = q.new_scratch();
        for seed in 0..200 {
            let c = PoissonClocks::new(seed);
            let config = sample_configuration_with(*q.window(), T_C, &c, true).unwrap();
            assert_eq!(q.connected_at(&c, T_C, &mut scratch), q.is_connected(&config).unwrap());
        }
    }

    #[test]
    fn arrival_order_prefix() {
        let q = ConnectionQuery::one_arm(3, PI / 3.0, false).unwrap();
        let c = PoissonClocks::new(4);
        let order = ArrivalOrder::build(&q, &c, 2.0);
        assert!(order.entries().windows(2).all(|w| w[0].0 <= w[1].0));
        let cut = order.occupied_prefix(0.5);
        assert!(cut.iter().all(|&(t, _)| t <= 0.5));
        assert_eq!(cut.len(), order.entries().iter().filter(|e| e.0 <= 0.5).count());
    }
}
