//! One function per subcommand. Each returns the files it wants written;
//! nothing touches the disk until the whole computation has succeeded or
//! failed in a way that still leaves results worth keeping.

use serde::Serialize;

use firelab::clocks::{AnyClocks, PoissonClocks, SharedStreamClocks};
use firelab::estimators::tables::{write_estimate_table, write_json, write_rows, EstimateRow};
use firelab::estimators::{
    borel_cantelli_report, default_a_window, estimate_events, estimate_one_arm, fit_correlation_length,
    fit_xi_exponent, height_distribution, EventConfig, FitResult, HeightConfig, OneArmSampler, SplittingConfig,
    Transform, XiFit, XiOptions,
};
use firelab::firesim::{run_with, write_log_csv, Domain, RunOptions, RunSummary};
use firelab::lattice::{ConeRegion, Region, TubeRegion, Window};
use firelab::{Execution, T_C};

use crate::config::{ClockStub, RegionKind, RunConfig, SamplerKind};
use crate::error::CliError;

/// Files to write, and the failure to report after writing them.
#[derive(Default)]
pub struct Output {
    pub files: Vec<(String, Vec<u8>)>,
    pub failure: Option<CliError>,
}

impl Output {
    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_rows(&mut buf, rows)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_json(&mut buf, value)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn fail(&mut self, e: CliError) {
        if self.failure.is_none() {
            self.failure = Some(e);
        }
    }
}

pub fn clocks(stub: ClockStub, seed: u64) -> AnyClocks {
    match stub {
        ClockStub::Poisson => AnyClocks::Poisson(PoissonClocks::new(seed)),
        ClockStub::SharedStream => AnyClocks::SharedStream(SharedStreamClocks::new(seed)),
    }
}

fn cone(c: &RunConfig) -> Result<Region, CliError> {
    Ok(Region::Cone(ConeRegion::new(c.x, c.phi)?))
}

fn region(c: &RunConfig) -> Result<Region, CliError> {
    Ok(match c.region {
        RegionKind::Cone => Region::Cone(ConeRegion::new(c.x, c.phi)?),
        RegionKind::Tube => Region::Tube(TubeRegion::new(c.x, c.phi)?),
    })
}

fn need_samples(name: &str, samples: u64) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::Config(format!("{name} must be at least 1")));
    }
    Ok(())
}

pub fn simulate(c: &RunConfig, _exec: Execution) -> Result<Output, CliError> {
    if c.width < 1 || c.height < 1 {
        return Err(CliError::Config("width and height must be positive".into()));
    }
    let opts = RunOptions::new(c.t_end).map_err(|e| match e {
        firelab::Error::BeyondCriticalTime(t) => {
            CliError::Config(format!("t_end = {t} exceeds the critical time cap t_c = ln 2 = {T_C}"))
        }
        e => e.into(),
    })?;
    let cone = cone(c)?;
    let window = Window::half_plane(-c.width, c.width, c.height)?;
    let opts = opts.tracking(cone);
    let tracked = opts.tracked.clone();
    let (state, log) = run_with(Domain::from_window(&window)?, clocks(c.clock_stub, c.seed), opts, &mut ())?;
    let mut out = Output::default();
    let mut buf = Vec::new();
    write_log_csv(&mut buf, &log, &cone, &tracked)?;
    out.files.push(("destruction_log.csv".into(), buf));
    out.json("summary.json", &RunSummary::new(window, c.seed, c.t_end, &state, &log, cone, &tracked))?;
    println!("{} fires, {} sites destroyed", log.len(), log.iter().map(|r| r.size).sum::<usize>());
    Ok(out)
}

#[derive(Serialize)]
struct FitReport<'a> {
    t: f64,
    phi: f64,
    half_plane: bool,
    fit: Option<&'a FitResult>,
    error: Option<String>,
}

pub fn onearm(c: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    need_samples("samples", c.samples)?;
    if c.n_list.is_empty() || c.n_list.contains(&0) {
        return Err(CliError::Config("n_list must hold positive radii".into()));
    }
    if !(0.0..=T_C).contains(&c.t) {
        return Err(CliError::Config(format!("t must lie in [0, ln 2], got {}", c.t)));
    }
    let estimates = c
        .n_list
        .iter()
        .map(|&n| estimate_one_arm(n, c.t, c.phi, c.samples, c.half_plane, c.seed, exec))
        .collect::<firelab::Result<Vec<_>>>()?;
    let rows: Vec<EstimateRow> = c.n_list.iter().zip(&estimates).map(|(&n, e)| EstimateRow::new(n, e)).collect();
    let mut out = Output::default();
    let mut buf = Vec::new();
    write_estimate_table(&mut buf, &rows)?;
    out.files.push(("onearm.csv".into(), buf));
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        c.n_list.iter().zip(&estimates).filter(|(_, e)| e.point > 0.0).map(|(&n, e)| (n as f64, e.point)).unzip();
    let fit = FitResult::fit(&xs, &ys, Transform::Log, Transform::Log);
    if let Ok(f) = &fit {
        println!("log-log slope {:.4} (95% CI {:.4} .. {:.4})", f.slope, f.slope_ci.0, f.slope_ci.1);
    }
    let report = FitReport {
        t: c.t,
        phi: c.phi,
        half_plane: c.half_plane,
        fit: fit.as_ref().ok(),
        error: fit.as_ref().err().map(|e| e.to_string()),
    };
    out.json("onearm_fit.json", &report)?;
    if let Err(e) = fit {
        out.fail(e.into());
    }
    Ok(out)
}

#[derive(Serialize)]
struct XiRow {
    t: f64,
    xi: f64,
    xi_ci_low: f64,
    xi_ci_high: f64,
    r_squared: f64,
}

#[derive(Serialize)]
struct XiScanReport {
    synthetic: bool,
    prefactor_power: f64,
    exponent_fit: Option<FitResult>,
    points: Vec<XiFit>,
    error: Option<String>,
}

pub fn xiscan(c: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    if c.t_list.len() < 3 || c.t_list.iter().any(|t| !(0.0..T_C).contains(t)) {
        return Err(CliError::Config("t_list needs at least three times in [0, ln 2)".into()));
    }
    let mut out = Output::default();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    if c.synthetic {
        for &t in &c.t_list {
            let xi = (T_C - t).powf(-4.0 / 3.0);
            rows.push(XiRow { t, xi, xi_ci_low: xi, xi_ci_high: xi, r_squared: 1.0 });
        }
    } else {
        let sampler = match c.sampler {
            SamplerKind::Plain => {
                need_samples("samples", c.samples)?;
                OneArmSampler::Plain { samples: c.samples }
            }
            SamplerKind::Splitting => {
                OneArmSampler::Splitting(SplittingConfig { effort: c.effort, replicates: c.replicates })
            }
        };
        let opts = XiOptions { phi: c.phi, sampler, prefactor_power: c.prefactor_power, seed: c.seed };
        for (i, &t) in c.t_list.iter().enumerate() {
            match fit_correlation_length(t, &c.xi_n_list, &opts, exec) {
                Ok(fit) => {
                    let table: Vec<EstimateRow> =
                        fit.n_list.iter().zip(&fit.estimates).map(|(&n, e)| EstimateRow::new(n, e)).collect();
                    out.csv(&format!("onearm_t{i}.csv"), &table)?;
                    for w in &fit.warnings {
                        eprintln!("warning: t = {t}: {w}");
                    }
                    rows.push(XiRow {
                        t,
                        xi: fit.xi,
                        xi_ci_low: fit.xi_ci.0,
                        xi_ci_high: fit.xi_ci.1,
                        r_squared: fit.fit.r_squared,
                    });
                    points.push(fit);
                }
                Err(firelab::Error::DegenerateFit(m)) => out.fail(CliError::Fit(format!("t = {t}: {m}"))),
                Err(e) => return Err(e.into()),
            }
        }
    }
    out.csv("xiscan.csv", &rows)?;
    let (ts, xis): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.t, r.xi)).unzip();
    let exponent = if out.failure.is_none() { Some(fit_xi_exponent(&ts, &xis)) } else { None };
    if let Some(Ok(f)) = &exponent {
        println!("xi exponent {:.6} (95% CI {:.4} .. {:.4})", f.slope, f.slope_ci.0, f.slope_ci.1);
    }
    let error = match (&out.failure, &exponent) {
        (Some(e), _) => Some(e.to_string()),
        (None, Some(Err(e))) => Some(e.to_string()),
        _ => None,
    };
    let report = XiScanReport {
        synthetic: c.synthetic,
        prefactor_power: c.prefactor_power,
        exponent_fit: exponent.as_ref().and_then(|r| r.as_ref().ok().cloned()),
        points,
        error,
    };
    out.json("xiscan_fit.json", &report)?;
    if let Some(Err(e)) = exponent {
        out.fail(e.into());
    }
    Ok(out)
}

#[derive(Serialize)]
struct EventRow {
    n: u32,
    epsilon: f64,
    event: &'static str,
    point: f64,
    ci_low: f64,
    ci_high: f64,
    samples: u64,
}

pub fn events(c: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    need_samples("event_samples", c.event_samples)?;
    if c.event_n_list.len() < 3 {
        return Err(CliError::Config("event_n_list needs at least three values".into()));
    }
    let mut config = EventConfig::new(c.event_n_list.clone(), c.event_samples, c.seed);
    config.x = c.x;
    config.phi = c.phi;
    config.delta = c.delta;
    config.side = c.side;
    for &n in &config.n_list {
        config.params(n)?;
    }
    if c.event_a {
        config.a_window = Some(default_a_window(config.x, &config.n_list)?);
    }
    let estimates = estimate_events(&config, exec)?;
    let mut rows = Vec::new();
    for e in &estimates {
        let named = [
            ("a", e.a),
            ("b", Some(e.b)),
            ("c", Some(e.c)),
            ("d", Some(e.d)),
            ("connected", Some(e.connected)),
            ("late_ring", Some(e.late_ring)),
        ];
        for (event, est) in named {
            if let Some(est) = est {
                rows.push(EventRow {
                    n: e.n,
                    epsilon: e.epsilon,
                    event,
                    point: est.point,
                    ci_low: est.ci_low,
                    ci_high: est.ci_high,
                    samples: est.n_samples,
                });
            }
        }
    }
    let mut out = Output::default();
    out.csv("events.csv", &rows)?;
    out.json("events.json", &estimates)?;
    let d: Vec<_> = estimates.iter().map(|e| e.d).collect();
    match borel_cantelli_report(&config.n_list, &d) {
        Ok(report) => {
            println!("D slope {:.4}, verdict {:?}", report.fit.slope, report.verdict);
            out.json("borel_cantelli.json", &report)?;
        }
        Err(e) => out.fail(e.into()),
    }
    let a_not_b: u64 = estimates.iter().map(|e| e.violations.a_not_b).sum();
    let c_not_b: u64 = estimates.iter().map(|e| e.violations.c_not_b).sum();
    let b_not_c_not_d: u64 = estimates.iter().map(|e| e.violations.b_not_c_not_d).sum();
    if c.event_a {
        println!("A without B: {a_not_b}");
    } else {
        println!("A without B: not sampled (set event_a = true)");
    }
    println!("C without B: {c_not_b}");
    println!("B without C or D: {b_not_c_not_d}");
    if a_not_b > 0 {
        out.fail(CliError::Invariant(format!("A without B in {a_not_b} samples")));
    }
    if b_not_c_not_d > 0 {
        out.fail(CliError::Invariant(format!("B without C or D in {b_not_c_not_d} samples")));
    }
    Ok(out)
}

#[derive(Serialize)]
struct EcdfRow {
    window_height: i32,
    value: f64,
    cdf: f64,
}

#[derive(Serialize)]
struct HeightSummary {
    window_height: i32,
    window: Window,
    uncertified_fraction: f64,
    median: firelab::estimators::QuantileEstimate,
    p90: firelab::estimators::QuantileEstimate,
}

pub fn heights(c: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    need_samples("height_samples", c.height_samples)?;
    if c.heights.is_empty() || c.heights.iter().any(|&h| h < 1) {
        return Err(CliError::Config("heights must be positive".into()));
    }
    let mut config = HeightConfig::new(region(c)?, c.heights.clone(), c.height_samples, c.seed);
    config.margin = c.margin;
    config.eval_rows = c.eval_rows;
    let dists = height_distribution(&config, exec)?;
    let mut out = Output::default();
    let rows: Vec<EcdfRow> = dists
        .iter()
        .flat_map(|d| d.ecdf.iter().map(|&(value, cdf)| EcdfRow { window_height: d.window_height, value, cdf }))
        .collect();
    out.csv("heights.csv", &rows)?;
    let summary: Vec<HeightSummary> = dists
        .iter()
        .map(|d| HeightSummary {
            window_height: d.window_height,
            window: d.window,
            uncertified_fraction: d.uncertified_fraction,
            median: d.median,
            p90: d.p90,
        })
        .collect();
    for s in &summary {
        println!(
            "H = {}: median {:.3}, p90 {:.3}, uncertified {:.3}",
            s.window_height, s.median.value, s.p90.value, s.uncertified_fraction
        );
    }
    out.json("heights.json", &summary)?;
    Ok(out)
}
