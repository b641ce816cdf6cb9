//! Run-time checks of the defining properties of the process, driven through
//! the observer hooks and periodic snapshots.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DestructionRecord, Domain, FireObserver, FireSim, FireState, RunOptions};
use crate::clocks::ClockSource;
use crate::error::Result;
use crate::lattice::SiteCoord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    /// Boundary-row sites are never occupied.
    BoundaryVacant,
    /// The fire state never exceeds the growth state.
    Domination,
    /// Each fire was lit by a ringing boundary site next to the cluster.
    DestructionProvenance,
    /// A fire takes exactly one whole occupied cluster.
    ClusterAtomicity,
    /// Trees only appear at rings of their own clock.
    GrowthAtJump,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Invariant::BoundaryVacant => "boundary-vacancy",
            Invariant::Domination => "domination",
            Invariant::DestructionProvenance => "destruction-provenance",
            Invariant::ClusterAtomicity => "cluster-atomicity",
            Invariant::GrowthAtJump => "growth-at-jump",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub time: f64,
    pub site: SiteCoord,
}

/// Observer that keeps its own copy of the occupancy and checks every event
/// against it and against the clocks.
pub struct Auditor<'a, C> {
    clocks: &'a C,
    shadow: Vec<bool>,
    pub violations: Vec<Violation>,
    pub checks: u64,
}

impl<'a, C: ClockSource> Auditor<'a, C> {
    pub fn new(clocks: &'a C, domain: &Domain) -> Self {
        Self { clocks, shadow: vec![false; domain.len()], violations: Vec::new(), checks: 0 }
    }

    fn fail(&mut self, invariant: Invariant, time: f64, site: SiteCoord) {
        self.violations.push(Violation { invariant, time, site });
    }

    fn rang_at(&self, site: SiteCoord, t: f64) -> bool {
        self.clocks.jumps_in(site, 0.0, t).last() == Some(&t)
    }

    /// Compares a snapshot against the growth process at the snapshot time.
    pub fn check_snapshot(&mut self, state: &FireState) {
        let t = state.time;
        for (i, &s) in state.domain.sites().iter().enumerate() {
            self.checks += 1;
            if !state.occupied[i] {
                continue;
            }
            if s.l == 0 {
                self.fail(Invariant::BoundaryVacant, t, s);
            }
            if self.clocks.first_arrival(s) > t {
                self.fail(Invariant::Domination, t, s);
            }
        }
    }
}

impl<C: ClockSource> FireObserver for Auditor<'_, C> {
    fn on_growth(&mut self, t: f64, site: usize, sim: &FireState) {
        self.checks += 1;
        let s = sim.domain.sites()[site];
        if s.l == 0 {
            self.fail(Invariant::BoundaryVacant, t, s);
        }
        if self.shadow[site] || !self.rang_at(s, t) {
            self.fail(Invariant::GrowthAtJump, t, s);
        }
        self.shadow[site] = true;
    }

    fn on_destruction(&mut self, record: &DestructionRecord, burned: &[usize], sim: &FireState) {
        self.checks += 1;
        let t = record.time;
        let ignition = record.ignition;
        let sites: Vec<SiteCoord> = burned.iter().map(|&i| sim.domain.sites()[i]).collect();
        let adjacent = sites.iter().any(|s| s.is_neighbor(ignition));
        if ignition.l != 0 || !adjacent || !self.rang_at(ignition, t) || burned.is_empty() {
            self.fail(Invariant::DestructionProvenance, t, ignition);
        }
        // The burned set must be exactly one cluster of the pre-fire state.
        let inside: HashSet<usize> = burned.iter().copied().collect();
        for &i in burned {
            if !self.shadow[i] {
                self.fail(Invariant::ClusterAtomicity, t, sim.domain.sites()[i]);
            }
        }
        let mut seen = HashSet::new();
        let mut stack: Vec<usize> = burned.first().copied().into_iter().collect();
        let mut reached = 0;
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            reached += 1;
            for u in sim.domain.neighbors(v) {
                if self.shadow[u] && !seen.contains(&u) {
                    if !inside.contains(&u) {
                        self.fail(Invariant::ClusterAtomicity, t, sim.domain.sites()[u]);
                    }
                    stack.push(u);
                }
            }
        }
        if reached != burned.len() {
            self.fail(Invariant::ClusterAtomicity, t, ignition);
        }
        for &i in burned {
            self.shadow[i] = false;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub runs: usize,
    pub checks: u64,
    pub fires: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn merge(mut self, other: AuditReport) -> Self {
        self.runs += other.runs;
        self.checks += other.checks;
        self.fires += other.fires;
        self.violations.extend(other.violations);
        self
    }

    pub fn first_failure(&self) -> Option<Invariant> {
        self.violations.first().map(|v| v.invariant)
    }
}

/// Runs the process with the auditor attached, also checking `snapshots`
/// evenly spaced states.
pub fn audit_run<C: ClockSource + Copy>(
    domain: Domain,
    clocks: C,
    opts: RunOptions,
    snapshots: usize,
) -> Result<AuditReport> {
    let t_end = opts.t_end;
    let mut sim = FireSim::new(domain, clocks, opts)?;
    let clocks = *sim.clocks();
    let mut auditor = Auditor::new(&clocks, &sim.state().domain);
    for j in 1..=snapshots {
        sim.advance_to(t_end * j as f64 / snapshots as f64, &mut auditor);
        auditor.check_snapshot(sim.state());
    }
    sim.run_to_end(&mut auditor);
    auditor.check_snapshot(sim.state());
    Ok(AuditReport { runs: 1, checks: auditor.checks, fires: sim.log().len(), violations: auditor.violations })
}
