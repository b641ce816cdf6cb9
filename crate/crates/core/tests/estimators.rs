use std::f64::consts::{FRAC_PI_3, PI};

use firelab::clocks::mix64;
use firelab::estimators::{
    borel_cantelli_report, estimate_events, estimate_one_arm, estimate_one_arm_splitting, fit_correlation_length,
    fit_xi_exponent, fit_xi_from_estimates, height_distribution, EstimateResult, EventConfig, EventParams,
    HeightConfig, OneArmSampler, Side, SplittingConfig, Verdict, XiOptions, DEFAULT_DELTA,
};
use firelab::firesim::{height_of_destruction, run};
use firelab::lattice::{ConeRegion, Region, TubeRegion, Window};
use firelab::{Error, Execution, T_C};

fn exact(values: &[f64]) -> Vec<EstimateResult> {
    values
        .iter()
        .map(|&p| EstimateResult { point: p, n_samples: 1000, successes: 1000, ci_low: p, ci_high: p })
        .collect()
}

#[test]
fn pure_exponential_recovers_xi() {
    let n_list: Vec<u32> = (1..=40).collect();
    let p: Vec<f64> = n_list.iter().map(|&n| (-(n as f64) / 10.0).exp()).collect();
    let fit = fit_xi_from_estimates(0.5, &n_list, &exact(&p), 0.0).unwrap();
    assert!((fit.xi - 10.0).abs() < 1e-6, "{}", fit.xi);
}

#[test]
fn linear_prefactor_is_divided_out() {
    for xi in [3.0, 10.0, 25.0] {
        let n_list: Vec<u32> = (1..=(10.0 * xi) as u32).collect();
        let p: Vec<f64> = n_list.iter().map(|&n| 0.37 * n as f64 * (-(n as f64) / xi).exp()).collect();
        let fit = fit_xi_from_estimates(0.5, &n_list, &exact(&p), 1.0).unwrap();
        assert!((fit.xi / xi - 1.0).abs() < 0.05, "{} vs {xi}", fit.xi);
        assert!((fit.fit.intercept - 0.37f64.ln()).abs() < 1e-6);
    }
}

#[test]
fn degenerate_fits_are_reported() {
    let n_list = [5, 10, 15, 20];
    let zeros = exact(&[0.1, 0.0, 0.0, 0.0]);
    assert!(matches!(fit_xi_from_estimates(0.5, &n_list, &zeros, 1.0), Err(Error::DegenerateFit(_))));
    let rising = exact(&[0.1, 0.2, 0.3, 0.4]);
    assert!(matches!(fit_xi_from_estimates(0.5, &n_list, &rising, 0.0), Err(Error::DegenerateFit(_))));
    let sparse = vec![EstimateResult::wilson(5, 100); 4];
    let mut decaying = sparse.clone();
    for (i, e) in decaying.iter_mut().enumerate() {
        e.point = 0.1 / (i + 1) as f64;
    }
    let fit = fit_xi_from_estimates(0.5, &n_list, &decaying, 0.0).unwrap();
    assert_eq!(fit.warnings.len(), 4);
}

#[test]
fn synthetic_power_law_slope() {
    let ts: Vec<f64> = [0.3, 0.22, 0.15, 0.1, 0.05].iter().map(|d| T_C - d).collect();
    let xis: Vec<f64> = ts.iter().map(|t| (T_C - t).powf(-4.0 / 3.0)).collect();
    let fit = fit_xi_exponent(&ts, &xis).unwrap();
    assert!((fit.slope + 4.0 / 3.0).abs() < 1e-6);
}

#[test]
fn summable_and_harmonic_series() {
    let n_list: Vec<u32> = (1..=100_000).collect();
    let inv_sq: Vec<f64> = n_list.iter().map(|&n| 1.0 / (n as f64).powi(2)).collect();
    let report = borel_cantelli_report(&n_list, &exact(&inv_sq)).unwrap();
    assert!((report.partial_sums.last().unwrap() - PI * PI / 6.0).abs() < 1e-4);
    assert_eq!(report.verdict, Verdict::SummableTrend);
    let harmonic: Vec<f64> = n_list.iter().map(|&n| 1.0 / n as f64).collect();
    assert_eq!(borel_cantelli_report(&n_list, &exact(&harmonic)).unwrap().verdict, Verdict::NotSummable);
}

#[test]
fn wilson_coverage() {
    let mut covered = 0;
    let trials = 1000u64;
    for (j, p) in [0.02, 0.3, 0.5].into_iter().enumerate() {
        for trial in 0..trials {
            let n = 200u64;
            let hits = (0..n)
                .filter(|&i| {
                    let u = (mix64(mix64(trial * 7919 + j as u64) ^ i) >> 11) as f64 / (1u64 << 53) as f64;
                    u < p
                })
                .count() as u64;
            covered += EstimateResult::wilson(hits, n).contains(p) as u64;
        }
    }
    let coverage = covered as f64 / (3 * trials) as f64;
    assert!(coverage >= 0.93, "coverage {coverage}");
}

#[test]
fn one_arm_edge_cases() {
    let e = estimate_one_arm(4, 0.0, FRAC_PI_3, 500, true, 1, Execution::default()).unwrap();
    assert_eq!(e.point, 0.0);
    assert!(estimate_one_arm(4, T_C, FRAC_PI_3, 0, true, 1, Execution::default()).is_err());
    assert!(estimate_one_arm(4, 1.0, FRAC_PI_3, 10, true, 1, Execution::default()).is_err());
}

#[test]
fn half_plane_doubling_ratio() {
    let exec = Execution::default();
    let a = estimate_one_arm(64, T_C, FRAC_PI_3, 10_000, true, 3, exec).unwrap();
    let b = estimate_one_arm(128, T_C, FRAC_PI_3, 10_000, true, 3, exec).unwrap();
    let ratio = b.point / a.point;
    let rel = ((a.binomial_std_error() / a.point).powi(2) + (b.binomial_std_error() / b.point).powi(2)).sqrt();
    let want = 2f64.powf(-1.0 / 3.0);
    assert!((ratio - want).abs() < 1.96 * ratio * rel, "ratio {ratio}");
}

#[test]
fn splitting_agrees_with_plain_sampling() {
    let exec = Execution::default();
    let t = T_C - 0.25;
    let plain = estimate_one_arm(6, t, FRAC_PI_3, 20_000, false, 5, exec).unwrap();
    let split = estimate_one_arm_splitting(t, FRAC_PI_3, 6, SplittingConfig { effort: 500, replicates: 10 }, 5, exec)
        .unwrap()[5];
    let se = (plain.binomial_std_error().powi(2) + split.std_error().powi(2)).sqrt();
    assert!((plain.point - split.point).abs() < 3.0 * se, "{} vs {}", plain.point, split.point);
}

#[test]
fn correlation_length_grows_towards_criticality() {
    let opts = XiOptions {
        sampler: OneArmSampler::Splitting(SplittingConfig { effort: 300, replicates: 4 }),
        ..XiOptions::default()
    };
    let n_list = [4, 8, 12, 16, 20, 24];
    let far = fit_correlation_length(T_C - 0.2, &n_list, &opts, Execution::default()).unwrap();
    let near = fit_correlation_length(T_C - 0.1, &n_list, &opts, Execution::default()).unwrap();
    assert!(far.xi < near.xi, "{} vs {}", far.xi, near.xi);
    assert!(fit_correlation_length(T_C, &n_list, &opts, Execution::default()).is_err());
    assert!(fit_correlation_length(0.3, &[4, 8, 12], &opts, Execution::default()).is_err());
}

#[test]
fn small_n_is_rejected() {
    assert!(EventParams::new(0.0, FRAC_PI_3, DEFAULT_DELTA, 1).is_err());
    assert!(EventParams::new(0.0, FRAC_PI_3, DEFAULT_DELTA, 2).is_ok());
    assert!(EventParams::new(0.0, FRAC_PI_3, 0.1, 8).is_err());
}

#[test]
fn event_bounds_and_independence() {
    let config = EventConfig::new(vec![8, 16, 32], 20_000, 9);
    for e in estimate_events(&config, Execution::default()).unwrap() {
        // Late ring and connection read disjoint clocks.
        let se = e.joint.binomial_std_error().max(1e-4);
        assert!((e.joint.point - e.connected.point * e.late_ring.point).abs() < 3.0 * se, "n {}", e.n);
        let bound = e.connected.point * (1.0 - (-e.epsilon).exp());
        assert!(e.d.point <= bound + 3.0 * e.d.binomial_std_error().max(1e-4), "n {}", e.n);
        let se = (e.c.binomial_std_error().powi(2) + e.d.binomial_std_error().powi(2)).sqrt();
        assert!(e.b.point <= e.c.point + e.d.point + 3.0 * se);
        assert_eq!(e.violations.b_not_c_not_d, 0);
        assert!((e.late_ring.point - (1.0 - (-e.epsilon).exp())).abs() < 4.0 * e.late_ring.binomial_std_error());
    }
}

#[test]
fn event_d_decreases() {
    let config = EventConfig::new(vec![16, 32, 64, 128], 20_000, 10);
    let est = estimate_events(&config, Execution::default()).unwrap();
    assert!(est.windows(2).all(|w| w[1].d.point < w[0].d.point));
}

#[test]
fn fire_event_implies_late_ring_event() {
    let mut config = EventConfig::new(vec![8, 16], 500, 11);
    config.a_window = Some(firelab::estimators::default_a_window(config.x, &config.n_list).unwrap());
    for e in estimate_events(&config, Execution::default()).unwrap() {
        assert!(e.a.is_some());
        assert_eq!(e.violations.a_not_b, 0);
    }
}

#[test]
fn left_side_matches_right_side_for_symmetric_x() {
    let right = EventConfig::new(vec![16], 20_000, 12);
    let left = EventConfig { side: Side::Left, ..right.clone() };
    let r = &estimate_events(&right, Execution::default()).unwrap()[0];
    let l = &estimate_events(&left, Execution::default()).unwrap()[0];
    let se = (r.b.binomial_std_error().powi(2) + l.b.binomial_std_error().powi(2)).sqrt();
    assert!((r.b.point - l.b.point).abs() < 4.0 * se);
    assert_ne!(r, l);
}

#[test]
fn tube_height_is_bounded_by_cone_and_remainder() {
    let window = Window::half_plane(-16, 16, 14).unwrap();
    let tube = Region::Tube(TubeRegion::new(0.0, FRAC_PI_3).unwrap());
    let cone = Region::Cone(ConeRegion::new(-2.0, 0.8).unwrap());
    let remainder_top =
        window.sites().filter(|&s| tube.contains(s) && !cone.contains(s)).map(|s| s.im_height()).fold(0.0, f64::max);
    for seed in 0..100u64 {
        let (_, log) = run(&window, seed, T_C).unwrap();
        let y_tube = height_of_destruction(&log, &tube, T_C, &[]);
        let y_cone = height_of_destruction(&log, &cone, T_C, &[]);
        assert!(y_tube <= y_cone.max(remainder_top) + 1e-12);
    }
}

#[test]
fn height_distribution_is_deterministic() {
    let cone = Region::Cone(ConeRegion::new(0.0, FRAC_PI_3).unwrap());
    let config = HeightConfig::new(cone, vec![6, 12], 100, 4);
    let a = height_distribution(&config, Execution::default()).unwrap();
    let b = height_distribution(&config, Execution::Sequential).unwrap();
    assert_eq!(a, b);
    for d in &a {
        assert!(d.ecdf.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        assert_eq!(d.ecdf.last().unwrap().1, 1.0);
        assert!(d.median.ci_low <= d.median.value && d.median.value <= d.median.ci_high);
        // Seeds with no fire in the cone form an atom at zero.
        assert_eq!(d.ecdf[0].0, 0.0);
    }
}
