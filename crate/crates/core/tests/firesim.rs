use std::collections::HashSet;
use std::f64::consts::FRAC_PI_3;

use firelab::clocks::{derive_seed, ClockSource, PoissonClocks};
use firelab::firesim::audit::audit_run;
use firelab::firesim::{
    certified_height_with, decompose_cells, decompose_configuration, height_of_destruction, run, run_cell, run_with,
    DestructionRecord, Domain, RunOptions,
};
use firelab::lattice::{ConeRegion, Region, SiteCoord, Window};
use firelab::percolation::{sample_configuration, GrowthConfiguration};
use firelab::{Error, T_C};

/// Probability that the three-state chain vacant -> occupied (rate 1) ->
/// burnt (rate 2) has burnt by `t`, integrated with classical RK4.
fn chain_burn_probability(t: f64) -> f64 {
    let f = |y: [f64; 3]| [-y[0], y[0] - 2.0 * y[1], 2.0 * y[1]];
    let steps = 10_000;
    let h = t / steps as f64;
    let mut y = [1.0, 0.0, 0.0];
    let axpy = |y: [f64; 3], k: [f64; 3], a: f64| [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(axpy(y, k1, h / 2.0));
        let k3 = f(axpy(y, k2, h / 2.0));
        let k4 = f(axpy(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y[2]
}

#[test]
fn single_interior_site_matches_chain() {
    let sites = [SiteCoord::new(0, 1), SiteCoord::new(0, 0), SiteCoord::new(1, 0)];
    let runs = 100_000u64;
    let burnt = (0..runs)
        .filter(|&i| {
            let domain = Domain::from_sites(sites).unwrap();
            let clocks = PoissonClocks::new(derive_seed(77, 0, i));
            !run_with(domain, clocks, RunOptions::new(T_C).unwrap(), &mut ()).unwrap().1.is_empty()
        })
        .count();
    let p = chain_burn_probability(T_C);
    let phat = burnt as f64 / runs as f64;
    let se = (p * (1.0 - p) / runs as f64).sqrt();
    assert!((phat - p).abs() < 3.0 * se, "{phat} vs {p}");
}

/// Clocks whose interior sites other than `(0, 1)` never ring before `t_c`.
struct OnlyOneInterior(PoissonClocks);

impl ClockSource for OnlyOneInterior {
    fn gap(&self, s: SiteCoord, i: u32) -> f64 {
        if s.l >= 1 && s != SiteCoord::new(0, 1) {
            10.0
        } else {
            self.0.gap(s, i)
        }
    }
}

#[test]
fn singleton_cell_matches_chain() {
    let window = Window::half_plane(-4, 4, 4).unwrap();
    let config = GrowthConfiguration::from_fn(window, T_C, true, |s| s == SiteCoord::new(0, 1));
    let cells = decompose_configuration(&config).unwrap();
    assert_eq!(cells.len(), 1);
    let runs = 20_000u64;
    let burnt = (0..runs)
        .filter(|&i| {
            let clocks = OnlyOneInterior(PoissonClocks::new(derive_seed(78, 0, i)));
            !run_cell(&cells[0], clocks, T_C).unwrap().is_empty()
        })
        .count();
    let p = chain_burn_probability(T_C);
    let phat = burnt as f64 / runs as f64;
    let se = (p * (1.0 - p) / runs as f64).sqrt();
    assert!((phat - p).abs() < 3.0 * se, "{phat} vs {p}");
}

#[test]
fn quiet_boundary_gives_pure_growth() {
    let window = Window::half_plane(-6, 6, 6).unwrap();
    let mut quiet = 0;
    for seed in 0..3000u64 {
        let clocks = PoissonClocks::new(seed);
        let rings = window.sites().filter(|s| s.l == 0).any(|s| clocks.first_arrival(s) <= 0.2);
        if rings {
            continue;
        }
        quiet += 1;
        let (state, log) = run(&window, seed, 0.2).unwrap();
        assert!(log.is_empty());
        for s in window.sites().filter(|s| s.l >= 1) {
            assert_eq!(state.is_occupied(s), clocks.first_arrival(s) <= 0.2);
        }
    }
    assert!(quiet > 0);
}

fn key(r: &DestructionRecord) -> (u64, SiteCoord, Vec<SiteCoord>) {
    (r.time.to_bits(), r.ignition, r.sites.clone().unwrap())
}

#[test]
fn cells_reproduce_the_full_run() {
    let window = Window::half_plane(-10, 10, 8).unwrap();
    let mut compared = 0;
    for seed in 0..1000u64 {
        let cells = decompose_cells(&window, seed).unwrap();
        let (_, full) = run(&window, seed, T_C).unwrap();
        let certified: Vec<_> = cells.iter().filter(|c| c.certified).collect();
        let in_certified: HashSet<SiteCoord> = certified.iter().flat_map(|c| c.core.iter().copied()).collect();
        let mut want: Vec<_> = full
            .iter()
            .filter(|r| r.sites.as_ref().unwrap().iter().all(|s| in_certified.contains(s)))
            .map(key)
            .collect();
        let mut got: Vec<_> = certified
            .iter()
            .flat_map(|c| run_cell(c, PoissonClocks::new(seed), T_C).unwrap())
            .map(|r| key(&r))
            .collect();
        want.sort();
        got.sort();
        compared += got.len();
        assert_eq!(got, want, "seed {seed}");
    }
    assert!(compared > 1000);
}

#[test]
fn cells_cover_the_occupied_interior() {
    let window = Window::half_plane(0, 29, 29).unwrap();
    for seed in 0..20u64 {
        let config = sample_configuration(window, T_C, seed, true).unwrap();
        let cells = decompose_cells(&window, seed).unwrap();
        let mut covered = HashSet::new();
        for c in &cells {
            for s in &c.core {
                assert!(config.is_occupied(*s) && s.l >= 1);
                assert!(covered.insert(*s), "cores overlap at {s}");
            }
            let core: HashSet<_> = c.core.iter().collect();
            for s in c.closure.iter().filter(|s| !core.contains(s)) {
                assert!(!window.contains(*s) || s.l == 0 || !config.is_occupied(*s));
            }
            let touches_edge = c.closure.iter().any(|&s| !window.contains(s) || window.is_edge(s));
            assert_eq!(c.certified, !touches_edge);
        }
        let occupied: HashSet<_> = config.occupied_sites().filter(|s| s.l >= 1).collect();
        assert_eq!(covered, occupied);
    }
}

#[test]
fn uncertified_cells_cannot_be_run() {
    let window = Window::half_plane(-3, 3, 3).unwrap();
    let found = (0..50u64).flat_map(|seed| decompose_cells(&window, seed).unwrap()).find(|c| !c.certified);
    let cell = found.expect("small windows have edge-touching cells");
    assert!(matches!(run_cell(&cell, PoissonClocks::new(0), T_C), Err(Error::UncertifiedCell)));
}

#[test]
fn larger_windows_keep_certification() {
    let cone = Region::Cone(ConeRegion::new(0.0, FRAC_PI_3).unwrap());
    let small = Window::half_plane(-12, 12, 8).unwrap();
    let large = Window::half_plane(-28, 28, 16).unwrap();
    let mut certified = 0;
    for seed in 0..100u64 {
        let clocks = PoissonClocks::new(seed);
        let a = certified_height_with(&small, clocks, &cone, Some(3)).unwrap();
        let b = certified_height_with(&large, clocks, &cone, Some(3)).unwrap();
        if a.certified {
            certified += 1;
            assert!(b.certified, "seed {seed}");
            assert_eq!(a.height, b.height, "seed {seed}");
        }
        assert!(b.height >= a.height || !b.certified);
    }
    assert!(certified > 0);
}

#[test]
fn audited_runs_are_clean() {
    let window = Window::half_plane(-12, 12, 10).unwrap();
    for seed in 0..200u64 {
        let domain = Domain::from_window(&window).unwrap();
        let report = audit_run(domain, PoissonClocks::new(seed), RunOptions::default(), 100).unwrap();
        assert!(report.violations.is_empty(), "seed {seed}: {:?}", report.violations.first());
    }
}

#[test]
fn runs_are_deterministic() {
    let window = Window::half_plane(-10, 10, 10).unwrap();
    for seed in 0..20u64 {
        let (a_state, a) = run(&window, seed, T_C).unwrap();
        let (b_state, b) = run(&window, seed, T_C).unwrap();
        assert_eq!(a, b);
        assert_eq!(a_state.occupied, b_state.occupied);
    }
}

#[test]
fn height_is_monotone() {
    let window = Window::half_plane(-10, 10, 10).unwrap();
    let narrow = Region::Cone(ConeRegion::new(0.0, 1.2).unwrap());
    let wide = Region::Cone(ConeRegion::new(0.0, 0.6).unwrap());
    for seed in 0..50u64 {
        let (_, log) = run(&window, seed, T_C).unwrap();
        let mut last = 0.0;
        for j in 0..=20 {
            let t = T_C * j as f64 / 20.0;
            let h = height_of_destruction(&log, &narrow, t, &[]);
            assert!(h >= last);
            assert!(height_of_destruction(&log, &wide, t, &[]) >= h);
            last = h;
        }
    }
}

#[test]
fn beyond_critical_time_is_rejected() {
    let window = Window::half_plane(-3, 3, 3).unwrap();
    assert!(matches!(run(&window, 0, 0.7), Err(Error::BeyondCriticalTime(_))));
}
