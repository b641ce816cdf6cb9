//! The invariant suites behind `firelab verify`. Every check is a pure
//! function of the configuration, so two runs give identical reports.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_3;

use serde::Serialize;

use firelab::clocks::{derive_seed, AnyClocks, ClockSource};
use firelab::firesim::audit::{audit_run, AuditReport};
use firelab::firesim::{decompose_cells_with, run_cell, run_with, Domain, RunOptions};
use firelab::lattice::{SiteCoord, Window};
use firelab::percolation::ConnectionQuery;
use firelab::{Execution, T_C};

use crate::commands::{clocks, Output};
use crate::config::RunConfig;
use crate::error::CliError;

const CLOCK_STREAM: u64 = 10;
const AUDIT_STREAM: u64 = 11;
const ORACLE_STREAM: u64 = 12;
const CHAIN_STREAM: u64 = 13;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub audit: AuditSummary,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct AuditSummary {
    pub runs: usize,
    pub checks: u64,
    pub fires: usize,
    pub violations: usize,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Occupation at `t_c` over a million sites and the correlation of
/// horizontally adjacent sites.
fn clock_statistics(field: &AnyClocks) -> Check {
    let side = 1000;
    let occupied = |s: SiteCoord| (field.first_arrival(s) <= T_C) as u8 as f64;
    let mut count = 0.0;
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for l in 0..side {
        for k in 0..side {
            let s = SiteCoord::new(k, l);
            let a = occupied(s);
            count += a;
            if k % 2 == 0 {
                let b = occupied(s.offset(1, 0));
                sa += a;
                sb += b;
                saa += a * a;
                sbb += b * b;
                sab += a * b;
            }
        }
    }
    let n = (side * side / 2) as f64;
    let frac = count / (side * side) as f64;
    let cov = sab / n - sa / n * sb / n;
    let r = cov / ((saa / n - (sa / n).powi(2)) * (sbb / n - (sb / n).powi(2))).sqrt();
    let passed = (frac - 0.5).abs() < 0.002 && r.abs() < 0.01;
    check("clock-independence", passed, format!("occupied fraction {frac:.5}, neighbour correlation {r:.5}"))
}

fn audit(c: &RunConfig, exec: Execution) -> Result<AuditReport, CliError> {
    let window = Window::half_plane(-12, 12, 12)?;
    let reports = exec.map(c.verify_runs, |i| {
        let field = clocks(c.clock_stub, derive_seed(c.seed, AUDIT_STREAM, i as u64));
        audit_run(Domain::from_window(&window)?, field, RunOptions::default(), 20)
    });
    let mut total = AuditReport::default();
    for r in reports {
        total = total.merge(r?);
    }
    Ok(total)
}

/// Heap, union-find and BFS answers to the same connection question, and
/// cell-by-cell runs against whole-window runs.
fn oracle_equivalence(c: &RunConfig, exec: Execution) -> Result<Check, CliError> {
    let mut mismatches = 0usize;
    for half_plane in [false, true] {
        let q = ConnectionQuery::one_arm(9, FRAC_PI_3, half_plane)?;
        let bad = exec.map_init(
            c.verify_runs,
            || q.new_scratch(),
            |scratch, i| {
                let field = clocks(c.clock_stub, derive_seed(c.seed, ORACLE_STREAM, i as u64));
                let heap = q.first_connection_time(&field, 2.0, scratch);
                let dsu = q.first_connection_time_union_find(&field, 2.0);
                let bfs = q.connected_at(&field, T_C, scratch);
                heap != dsu || bfs != heap.is_some_and(|t| t <= T_C)
            },
        );
        mismatches += bad.iter().filter(|&&b| b).count();
    }
    let window = Window::half_plane(-10, 10, 8)?;
    let runs = (c.verify_runs / 5).max(1);
    let bad = exec.map(runs, |i| -> firelab::Result<bool> {
        let field = clocks(c.clock_stub, derive_seed(c.seed, ORACLE_STREAM + 100, i as u64));
        let cells = decompose_cells_with(&window, &field)?;
        let (_, full) = run_with(Domain::from_window(&window)?, field, RunOptions::default(), &mut ())?;
        let inside: HashSet<SiteCoord> = cells.iter().filter(|c| c.certified).flat_map(|c| c.core.clone()).collect();
        let key = |r: &firelab::firesim::DestructionRecord| (r.time.to_bits(), r.ignition, r.sites.clone());
        let mut want: Vec<_> = full
            .iter()
            .filter(|r| r.sites.as_ref().is_some_and(|s| s.iter().all(|x| inside.contains(x))))
            .map(key)
            .collect();
        let mut got = Vec::new();
        for cell in cells.iter().filter(|c| c.certified) {
            got.extend(run_cell(cell, field, T_C)?.iter().map(key));
        }
        want.sort();
        got.sort();
        Ok(want != got)
    });
    for b in bad {
        mismatches += b? as usize;
    }
    Ok(check("oracle-equivalence", mismatches == 0, format!("{mismatches} mismatches")))
}

/// A lone interior site between two boundary sites burns by `t_c` with
/// probability `(1 - e^{-t_c})^2 = 1/4`.
fn two_state_chain(c: &RunConfig, exec: Execution) -> Result<Check, CliError> {
    let sites = [SiteCoord::new(0, 1), SiteCoord::new(0, 0), SiteCoord::new(1, 0)];
    let runs = c.chain_runs.max(1);
    let burnt = exec.map(runs as usize, |i| -> firelab::Result<bool> {
        let field = clocks(c.clock_stub, derive_seed(c.seed, CHAIN_STREAM, i as u64));
        Ok(!run_with(Domain::from_sites(sites)?, field, RunOptions::default(), &mut ())?.1.is_empty())
    });
    let mut hits = 0u64;
    for b in burnt {
        hits += b? as u64;
    }
    let p = (1.0 - (-T_C).exp()).powi(2);
    let phat = hits as f64 / runs as f64;
    let se = (p * (1.0 - p) / runs as f64).sqrt();
    let passed = (phat - p).abs() <= 3.0 * se;
    Ok(check("two-state-chain", passed, format!("estimate {phat:.5}, exact {p:.5}, 3 sigma {:.5}", 3.0 * se)))
}

pub fn verify(c: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    if c.verify_runs == 0 {
        return Err(CliError::Config("verify_runs must be at least 1".into()));
    }
    let field = clocks(c.clock_stub, derive_seed(c.seed, CLOCK_STREAM, 0));
    let mut checks = vec![clock_statistics(&field)];
    let audit = audit(c, exec)?;
    for inv in ["boundary-vacancy", "domination", "destruction-provenance", "cluster-atomicity", "growth-at-jump"] {
        let n = audit.violations.iter().filter(|v| v.invariant.to_string() == inv).count();
        checks.push(check(inv, n == 0, format!("{n} violations over {} runs", audit.runs)));
    }
    checks.push(oracle_equivalence(c, exec)?);
    checks.push(two_state_chain(c, exec)?);
    let passed = checks.iter().all(|c| c.passed);
    for ch in &checks {
        println!("{:<24} {}  {}", ch.name, if ch.passed { "ok" } else { "FAILED" }, ch.detail);
    }
    let report = VerifyReport {
        audit: AuditSummary {
            runs: audit.runs,
            checks: audit.checks,
            fires: audit.fires,
            violations: audit.violations.len(),
        },
        checks: checks.clone(),
        passed,
    };
    let mut out = Output::default();
    let mut buf = Vec::new();
    firelab::estimators::tables::write_json(&mut buf, &report)?;
    out.files.push(("verify_report.json".into(), buf));
    if let Some(first) = checks.iter().find(|c| !c.passed) {
        out.failure = Some(CliError::Invariant(format!("{} ({})", first.name, first.detail)));
    }
    Ok(out)
}
