//! Site-by-site exploration of the cluster seen from a source site.
//!
//! The explored cluster consists of the occupied sites reachable from the
//! source's neighbours without passing through the source. Every revealed
//! state is stored, so an exploration can be cloned and continued with a
//! different clock field for the unrevealed sites; this is what the
//! splitting estimator relies on.

use std::collections::{HashMap, VecDeque};

use crate::clocks::{ClockSource, PoissonClocks};
use crate::error::Result;
use crate::lattice::{RhombusSurface, SiteCoord, GEOM_EPS};

/// Rhombus-norm progress measure around the source.
#[derive(Clone, Copy, Debug)]
pub struct Progress {
    shape: RhombusSurface,
}

impl Progress {
    pub fn new(source: SiteCoord, phi: f64) -> Result<Self> {
        Ok(Self { shape: RhombusSurface::new(source, 1, phi)? })
    }

    pub fn of(&self, s: SiteCoord) -> f64 {
        self.shape.norm(s.point())
    }

    /// Level a cluster must reach to be connected to the radius-`n`
    /// rhombus surface: a site lies within distance 1 of that surface from
    /// the inside exactly when its norm is at least `n - 1/sin φ`.
    pub fn level_for(&self, n: u32) -> f64 {
        n as f64 - 1.0 / self.shape.phi.sin() - GEOM_EPS
    }
}

#[derive(Clone, Debug)]
pub struct Exploration {
    source: SiteCoord,
    half_plane: bool,
    revealed: HashMap<SiteCoord, bool>,
    queue: VecDeque<SiteCoord>,
    max_progress: f64,
    clocks: PoissonClocks,
}

impl Exploration {
    /// Reveals the source's neighbours under the clock field of `seed`.
    pub fn start(source: SiteCoord, half_plane: bool, t: f64, seed: u64, progress: &Progress) -> Self {
        let mut e = Self {
            source,
            half_plane,
            revealed: HashMap::new(),
            queue: VecDeque::new(),
            max_progress: f64::NEG_INFINITY,
            clocks: PoissonClocks::new(seed),
        };
        e.revealed.insert(source, false);
        for v in source.neighbors() {
            e.reveal(v, t, progress);
        }
        e
    }

    fn reveal(&mut self, s: SiteCoord, t: f64, progress: &Progress) {
        if self.revealed.contains_key(&s) || (self.half_plane && s.l < 0) {
            return;
        }
        let occupied = self.clocks.first_arrival(s) <= t;
        self.revealed.insert(s, occupied);
        if occupied {
            self.queue.push_back(s);
            self.max_progress = self.max_progress.max(progress.of(s));
        }
    }

    pub fn source(&self) -> SiteCoord {
        self.source
    }

    pub fn max_progress(&self) -> f64 {
        self.max_progress
    }

    pub fn is_exhausted(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn revealed_count(&self) -> usize {
        self.revealed.len()
    }

    /// Switches the clock field used for sites not yet revealed.
    pub fn reseed(&mut self, seed: u64) {
        self.clocks = PoissonClocks::new(seed);
    }

    /// Explores until the cluster reaches `level` (returns true) or is
    /// exhausted below it (returns false).
    pub fn advance_to(&mut self, level: f64, t: f64, progress: &Progress) -> bool {
        while self.max_progress < level {
            let Some(v) = self.queue.pop_front() else { return false };
            for u in v.neighbors() {
                self.reveal(u, t, progress);
            }
        }
        true
    }
}
