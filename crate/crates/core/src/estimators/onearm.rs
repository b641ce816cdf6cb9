//! One-arm probabilities: plain Monte Carlo, multilevel splitting for the
//! exponentially small subcritical regime, and the correlation-length fits
//! built on them.

use serde::{Deserialize, Serialize};

use super::stats::{EstimateResult, FitResult, Transform};
use super::streams;
use crate::clocks::{derive_seed, mix64, PoissonClocks, T_C};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::SiteCoord;
use crate::percolation::explore::{Exploration, Progress};
use crate::percolation::ConnectionQuery;

fn check_time(t: f64) -> Result<()> {
    if (0.0..=T_C).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must lie in [0, ln 2], got {t}")))
    }
}

/// Plain Monte-Carlo estimate of the one-arm probability. Sample `i` uses
/// the same clock field for every `n`, so estimates across `n` are coupled.
pub fn estimate_one_arm(
    n: u32,
    t: f64,
    phi: f64,
    samples: u64,
    half_plane: bool,
    seed: u64,
    exec: Execution,
) -> Result<EstimateResult> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    check_time(t)?;
    let q = ConnectionQuery::one_arm(n, phi, half_plane)?;
    let hits = exec.map_init(
        samples as usize,
        || q.new_scratch(),
        |scratch, i| {
            let clocks = PoissonClocks::new(derive_seed(seed, streams::ONE_ARM, i as u64));
            q.connected_at(&clocks, t, scratch)
        },
    );
    Ok(EstimateResult::wilson(hits.iter().filter(|&&h| h).count() as u64, samples))
}

/// Fixed-effort multilevel splitting for the full-plane one-arm event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingConfig {
    /// Particles carried from each level to the next.
    pub effort: usize,
    /// Independent repetitions, used for the confidence interval.
    pub replicates: usize,
}

impl Default for SplittingConfig {
    fn default() -> Self {
        Self { effort: 1000, replicates: 16 }
    }
}

/// One splitting pass: returns, for `n = 1..=n_max`, the estimate of
/// `P[0 ↔ S_n(0)]` and the number of particles that reached level `n`.
fn splitting_pass(t: f64, phi: f64, n_max: u32, effort: usize, seed: u64, exec: Execution) -> Result<Vec<(f64, u64)>> {
    let progress = Progress::new(SiteCoord::ORIGIN, phi)?;
    let mut particles: Vec<Exploration> = exec
        .map(effort, |j| Exploration::start(SiteCoord::ORIGIN, false, t, derive_seed(seed, 0, j as u64), &progress));
    let mut out = Vec::with_capacity(n_max as usize);
    let mut estimate = 1.0;
    for n in 1..=n_max {
        if particles.is_empty() {
            out.push((0.0, 0));
            continue;
        }
        let level = progress.level_for(n);
        let mut reached = vec![false; particles.len()];
        exec.for_each_mut(&mut particles, |_, p| {
            p.advance_to(level, t, &progress);
        });
        for (r, p) in reached.iter_mut().zip(&particles) {
            *r = p.max_progress() >= level;
        }
        let survivors: Vec<usize> = (0..particles.len()).filter(|&j| reached[j]).collect();
        estimate *= survivors.len() as f64 / particles.len() as f64;
        out.push((estimate, survivors.len() as u64));
        if survivors.is_empty() {
            particles.clear();
            continue;
        }
        // Multinomial resampling; every copy continues under a fresh clock
        // field for the sites it has not revealed yet.
        let stage_seed = derive_seed(seed, n as u64, u64::MAX);
        particles = (0..effort)
            .map(|j| {
                let bits = mix64(stage_seed ^ (j as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let pick = ((bits as u128 * survivors.len() as u128) >> 64) as usize;
                let mut p = particles[survivors[pick]].clone();
                p.reseed(derive_seed(stage_seed, 1, j as u64));
                p
            })
            .collect();
    }
    Ok(out)
}

/// Splitting estimates of the full-plane one-arm probability for every
/// `n = 1..=n_max` at once, averaged over independent replicates.
pub fn estimate_one_arm_splitting(
    t: f64,
    phi: f64,
    n_max: u32,
    config: SplittingConfig,
    seed: u64,
    exec: Execution,
) -> Result<Vec<EstimateResult>> {
    check_time(t)?;
    if n_max == 0 || config.effort == 0 || config.replicates < 2 {
        return Err(Error::InvalidParameter("splitting needs n_max ≥ 1, effort ≥ 1 and ≥ 2 replicates".into()));
    }
    let passes: Vec<Vec<(f64, u64)>> = (0..config.replicates)
        .map(|r| splitting_pass(t, phi, n_max, config.effort, derive_seed(seed, streams::SPLITTING, r as u64), exec))
        .collect::<Result<_>>()?;
    let total = (config.effort * config.replicates) as u64;
    Ok((0..n_max as usize)
        .map(|i| {
            let values: Vec<f64> = passes.iter().map(|p| p[i].0).collect();
            let hits = passes.iter().map(|p| p[i].1).sum();
            EstimateResult::from_replicates(&values, total, hits)
        })
        .collect())
}

/// How one-arm probabilities are sampled for a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OneArmSampler {
    Plain { samples: u64 },
    Splitting(SplittingConfig),
}

impl OneArmSampler {
    pub fn estimates(
        &self,
        t: f64,
        phi: f64,
        n_list: &[u32],
        seed: u64,
        exec: Execution,
    ) -> Result<Vec<EstimateResult>> {
        match *self {
            OneArmSampler::Plain { samples } => {
                n_list.iter().map(|&n| estimate_one_arm(n, t, phi, samples, false, seed, exec)).collect()
            }
            OneArmSampler::Splitting(cfg) => {
                let n_max = n_list.iter().copied().max().unwrap_or(0);
                let curve = estimate_one_arm_splitting(t, phi, n_max, cfg, seed, exec)?;
                Ok(n_list.iter().map(|&n| curve[n as usize - 1]).collect())
            }
        }
    }
}

/// Correlation length from a semi-log fit of `P̂_n / n^a` against `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiFit {
    pub t: f64,
    pub xi: f64,
    pub xi_ci: (f64, f64),
    /// Power `a` of the prefactor divided out before fitting.
    pub prefactor_power: f64,
    pub fit: FitResult,
    pub n_list: Vec<u32>,
    pub estimates: Vec<EstimateResult>,
    pub warnings: Vec<String>,
}

/// Below this many successes a point estimate is flagged as noisy.
pub const MIN_SUCCESSES: u64 = 20;

/// Fits `log(P̂_n / n^a) = c − n / ξ`. Points with a zero estimate are
/// dropped with a warning; if fewer than two remain, or the fitted decay is
/// not positive, the fit is degenerate.
pub fn fit_xi_from_estimates(
    t: f64,
    n_list: &[u32],
    estimates: &[EstimateResult],
    prefactor_power: f64,
) -> Result<XiFit> {
    if n_list.len() != estimates.len() {
        return Err(Error::InvalidParameter("one estimate per n is required".into()));
    }
    let mut warnings = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&n, e) in n_list.iter().zip(estimates) {
        if e.successes < MIN_SUCCESSES {
            warnings.push(format!("n = {n}: only {} successes", e.successes));
        }
        if e.point > 0.0 {
            xs.push(n as f64);
            ys.push(e.point / (n as f64).powf(prefactor_power));
        } else {
            warnings.push(format!("n = {n}: zero estimate dropped from the fit"));
        }
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} nonzero estimates at t = {t}", xs.len())));
    }
    let fit = FitResult::fit(&xs, &ys, Transform::Linear, Transform::Log)?;
    if !(fit.slope < 0.0) {
        return Err(Error::DegenerateFit(format!("non-negative decay rate {} at t = {t}", -fit.slope)));
    }
    let xi = -1.0 / fit.slope;
    let xi_ci = (-1.0 / fit.slope_ci.0, if fit.slope_ci.1 < 0.0 { -1.0 / fit.slope_ci.1 } else { f64::INFINITY });
    Ok(XiFit { t, xi, xi_ci, prefactor_power, fit, n_list: n_list.to_vec(), estimates: estimates.to_vec(), warnings })
}

/// Options shared by the correlation-length drivers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiOptions {
    pub phi: f64,
    pub sampler: OneArmSampler,
    pub prefactor_power: f64,
    pub seed: u64,
}

impl Default for XiOptions {
    fn default() -> Self {
        Self {
            phi: std::f64::consts::FRAC_PI_3,
            sampler: OneArmSampler::Splitting(SplittingConfig::default()),
            prefactor_power: 1.0,
            seed: 0,
        }
    }
}

pub fn fit_correlation_length(t: f64, n_list: &[u32], opts: &XiOptions, exec: Execution) -> Result<XiFit> {
    if !(t < T_C) {
        return Err(Error::InvalidParameter(format!("correlation length needs t < ln 2, got {t}")));
    }
    if n_list.len() < 4 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::InvalidParameter("n_list must be ascending with at least 4 positive entries".into()));
    }
    let estimates = opts.sampler.estimates(t, opts.phi, n_list, opts.seed, exec)?;
    fit_xi_from_estimates(t, n_list, &estimates, opts.prefactor_power)
}

/// Power-law fit of correlation lengths against the distance to `t_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiScan {
    pub fit: FitResult,
    pub points: Vec<XiFit>,
}

pub fn fit_xi_exponent(ts: &[f64], xis: &[f64]) -> Result<FitResult> {
    let gaps: Vec<f64> = ts.iter().map(|t| T_C - t).collect();
    FitResult::fit(&gaps, xis, Transform::Log, Transform::Log)
}

pub fn scan_xi_exponent(t_list: &[f64], n_list: &[u32], opts: &XiOptions, exec: Execution) -> Result<XiScan> {
    if t_list.len() < 3 {
        return Err(Error::InvalidParameter("need at least three times".into()));
    }
    let points = t_list.iter().map(|&t| fit_correlation_length(t, n_list, opts, exec)).collect::<Result<Vec<_>>>()?;
    let xis: Vec<f64> = points.iter().map(|p| p.xi).collect();
    Ok(XiScan { fit: fit_xi_exponent(t_list, &xis)?, points })
}
