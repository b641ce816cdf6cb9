//! Coupled estimators for the connection-and-ring events around the cone.
//!
//! For a site `w = ⌈x⌉ + n` on the boundary row, let `T` be the first time
//! `w` is connected to the upper half of the rhombus surface `S_n(w)` in the
//! half-plane growth process, and `ε = n^{-3/4+δ}`:
//!
//! * B: `T < t_c` and `w` rings in `(T, t_c]`;
//! * C: `T < t_c - ε`;
//! * D: `T < t_c` and `w` rings in `(max(T, t_c - ε), t_c]`;
//! * A: in the forest-fire process, `w` is connected to the cone at some
//!   `t < t_c` and rings in `(t, t_c]`.
//!
//! All events of one sample are evaluated on the same clock field, for all
//! `n` at once. Left-hand events are the right-hand ones under the mirror
//! image of the clock field with `x` negated.

use serde::{Deserialize, Serialize};

use super::stats::EstimateResult;
use super::streams;
use crate::clocks::{derive_seed, ClockSource, PoissonClocks, Reflected, T_C};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::firesim::{Domain, FireObserver, FireSim, FireState, RunOptions};
use crate::lattice::{ConeRegion, SiteCoord, Window, GEOM_EPS};
use crate::percolation::{ConnectionQuery, DisjointSets, Scratch};

pub const DEFAULT_DELTA: f64 = 1.0 / 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    pub x: f64,
    pub phi: f64,
    pub delta: f64,
    pub n: u32,
}

impl EventParams {
    pub fn new(x: f64, phi: f64, delta: f64, n: u32) -> Result<Self> {
        let p = Self { x, phi, delta, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0 / 12.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1/12), got {}", self.delta)));
        }
        if !(self.phi > 0.0 && self.phi < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!("phi must lie in (0, π/2), got {}", self.phi)));
        }
        if !self.x.is_finite() || self.n == 0 {
            return Err(Error::InvalidParameter("x must be finite and n positive".into()));
        }
        if !(T_C - self.epsilon() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "n = {} is too small: t_c - n^(-3/4+δ) = {} is not positive",
                self.n,
                T_C - self.epsilon()
            )));
        }
        Ok(())
    }

    /// Width `n^{-3/4+δ}` of the late time window.
    pub fn epsilon(&self) -> f64 {
        (self.n as f64).powf(-0.75 + self.delta)
    }

    /// The boundary site `⌈x⌉ + n`.
    pub fn site(&self) -> SiteCoord {
        SiteCoord::new(self.x.ceil() as i32 + self.n as i32, 0)
    }

    pub fn cone(&self) -> Result<ConeRegion> {
        ConeRegion::new(self.x, self.phi)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    #[default]
    Right,
    Left,
}

/// Outcome of all events for one `n` on one clock field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSample {
    /// First connection time to the half rhombus surface, if before `t_c`.
    pub t_connect: Option<f64>,
    pub a: Option<bool>,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    /// `w` rings in `(t_c - ε, t_c]`.
    pub late_ring: bool,
}

struct Geometry {
    params: EventParams,
    query: ConnectionQuery,
}

impl Geometry {
    fn new(params: EventParams) -> Result<Self> {
        params.validate()?;
        let query = ConnectionQuery::rhombus(params.site(), params.n, params.phi, true)?;
        Ok(Self { params, query })
    }

    fn sample<C: ClockSource>(&self, clocks: &C, scratch: &mut Scratch) -> EventSample {
        let w = self.params.site();
        let eps = self.params.epsilon();
        let t_connect = self.query.first_connection_time(clocks, T_C, scratch).filter(|&t| t < T_C);
        let late_ring = clocks.has_jump_in(w, T_C - eps, T_C);
        let (b, c, d) = match t_connect {
            Some(t) => (clocks.has_jump_in(w, t, T_C), t < T_C - eps, clocks.has_jump_in(w, t.max(T_C - eps), T_C)),
            None => (false, false, false),
        };
        EventSample { t_connect, a: None, b, c, d, late_ring }
    }
}

/// Forest-fire setup for event A: a half-plane window, the sites within
/// distance 1 of the cone, and which sites neighbour which `w`.
struct ConeWatchSetup {
    domain: Domain,
    near_cone: Vec<bool>,
    source_mask: Vec<u64>,
    sites: Vec<SiteCoord>,
}

impl ConeWatchSetup {
    fn new(window: &Window, cone: &ConeRegion, sites: &[SiteCoord]) -> Result<Self> {
        if sites.len() > 64 {
            return Err(Error::InvalidParameter("at most 64 values of n per run".into()));
        }
        let domain = Domain::from_window(window)?;
        for w in sites {
            if !window.contains(*w) || window.is_edge(*w) {
                return Err(Error::WindowTooSmall { site: *w, context: "boundary site of event A".into() });
            }
        }
        let near_cone = domain.sites().iter().map(|s| s.l >= 1 && cone.distance(s.point()) <= 1.0 + GEOM_EPS).collect();
        let source_mask = domain
            .sites()
            .iter()
            .map(|s| {
                sites
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| s.l >= 1 && s.is_neighbor(**w))
                    .fold(0u64, |m, (b, _)| m | 1 << b)
            })
            .collect();
        Ok(Self { domain, near_cone, source_mask, sites: sites.to_vec() })
    }

    /// Earliest time each `w` is connected to the cone in the fire process.
    fn first_connections<C: ClockSource + Copy>(&self, clocks: C) -> Result<Vec<Option<f64>>> {
        let mut watcher = ConeWatcher {
            setup: self,
            dsu: DisjointSets::new(self.domain.len()),
            touch: vec![false; self.domain.len()],
            mask: vec![0; self.domain.len()],
            first: vec![None; self.sites.len()],
            done: 0,
        };
        let mut sim = FireSim::new(self.domain.clone(), clocks, RunOptions::default())?;
        sim.run_to_end(&mut watcher);
        Ok(watcher.first)
    }
}

struct ConeWatcher<'a> {
    setup: &'a ConeWatchSetup,
    dsu: DisjointSets,
    touch: Vec<bool>,
    mask: Vec<u64>,
    first: Vec<Option<f64>>,
    done: u64,
}

impl FireObserver for ConeWatcher<'_> {
    fn on_growth(&mut self, t: f64, site: usize, sim: &FireState) {
        self.touch[site] = self.setup.near_cone[site];
        self.mask[site] = self.setup.source_mask[site];
        for u in sim.domain.neighbors(site) {
            if sim.occupied[u] {
                let (a, b) = (self.dsu.find(site), self.dsu.find(u));
                if a != b {
                    let r = self.dsu.union(a, b);
                    self.touch[r] = self.touch[a] || self.touch[b];
                    self.mask[r] = self.mask[a] | self.mask[b];
                }
            }
        }
        let r = self.dsu.find(site);
        let fresh = self.mask[r] & !self.done;
        if self.touch[r] && fresh != 0 {
            for (b, slot) in self.first.iter_mut().enumerate() {
                if fresh & (1 << b) != 0 {
                    *slot = Some(t);
                }
            }
            self.done |= fresh;
        }
    }

    fn on_destruction(&mut self, _record: &crate::firesim::DestructionRecord, burned: &[usize], _sim: &FireState) {
        for &i in burned {
            self.dsu.reset(i);
        }
    }
}

/// Forest-fire window used for event A when none is given: it holds every
/// `w` with room to spare and the cone up to height `n_max`.
pub fn default_a_window(x: f64, n_list: &[u32]) -> Result<Window> {
    let n_max = n_list.iter().copied().max().unwrap_or(1) as i32;
    let height = n_max + 4;
    Window::half_plane(x.floor() as i32 - height - 4, x.ceil() as i32 + 2 * n_max + 4, height)
}

/// Per-`n` summary of coupled event frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventEstimates {
    pub n: u32,
    pub epsilon: f64,
    pub a: Option<EstimateResult>,
    pub b: EstimateResult,
    pub c: EstimateResult,
    pub d: EstimateResult,
    /// Connection by `t_c`, the half-plane one-arm event at `w`.
    pub connected: EstimateResult,
    pub late_ring: EstimateResult,
    /// Connection by `t_c` together with a late ring.
    pub joint: EstimateResult,
    pub violations: Violations,
}

/// Per-sample failures of the implications between events.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    /// A without B.
    pub a_not_b: u64,
    /// C without B.
    pub c_not_b: u64,
    /// B without C and without D.
    pub b_not_c_not_d: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventConfig {
    pub x: f64,
    pub phi: f64,
    pub delta: f64,
    pub n_list: Vec<u32>,
    pub samples: u64,
    pub seed: u64,
    pub side: Side,
    /// Forest-fire window for event A; A is skipped when `None`.
    pub a_window: Option<Window>,
}

impl EventConfig {
    pub fn new(n_list: Vec<u32>, samples: u64, seed: u64) -> Self {
        Self {
            x: 0.0,
            phi: std::f64::consts::FRAC_PI_3,
            delta: DEFAULT_DELTA,
            n_list,
            samples,
            seed,
            side: Side::Right,
            a_window: None,
        }
    }

    pub fn params(&self, n: u32) -> Result<EventParams> {
        let x = match self.side {
            Side::Right => self.x,
            Side::Left => -self.x,
        };
        EventParams::new(x, self.phi, self.delta, n)
    }
}

/// Samples every event for every `n` on the clock fields of samples
/// `0..samples`; returns one row of samples per `n`.
pub fn sample_events(config: &EventConfig, exec: Execution) -> Result<Vec<Vec<EventSample>>> {
    if config.samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let geoms: Vec<Geometry> =
        config.n_list.iter().map(|&n| config.params(n).and_then(Geometry::new)).collect::<Result<_>>()?;
    let watch = match &config.a_window {
        Some(window) => {
            let p = config.params(config.n_list[0])?;
            let sites: Vec<SiteCoord> = geoms.iter().map(|g| g.params.site()).collect();
            Some(ConeWatchSetup::new(window, &p.cone()?, &sites)?)
        }
        None => None,
    };
    let per_sample: Vec<Result<Vec<EventSample>>> = exec.map_init(
        config.samples as usize,
        || geoms.iter().map(|g| g.query.new_scratch()).collect::<Vec<_>>(),
        |scratches, i| {
            let base = PoissonClocks::new(derive_seed(config.seed, streams::EVENTS, i as u64));
            match config.side {
                Side::Right => sample_one(&geoms, watch.as_ref(), base, scratches),
                Side::Left => sample_one(&geoms, watch.as_ref(), Reflected(base), scratches),
            }
        },
    );
    let per_sample = per_sample.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..geoms.len()).map(|j| per_sample.iter().map(|s| s[j]).collect()).collect())
}

fn sample_one<C: ClockSource + Copy>(
    geoms: &[Geometry],
    watch: Option<&ConeWatchSetup>,
    clocks: C,
    scratches: &mut [Scratch],
) -> Result<Vec<EventSample>> {
    let mut out: Vec<EventSample> = geoms.iter().zip(scratches.iter_mut()).map(|(g, s)| g.sample(&clocks, s)).collect();
    if let Some(watch) = watch {
        let first = watch.first_connections(clocks)?;
        for ((sample, t), w) in out.iter_mut().zip(first).zip(&watch.sites) {
            sample.a = Some(t.is_some_and(|t| t < T_C && clocks.has_jump_in(*w, t, T_C)));
        }
    }
    Ok(out)
}

pub fn summarize_events(n: u32, epsilon: f64, samples: &[EventSample]) -> EventEstimates {
    let total = samples.len() as u64;
    let count = |f: &dyn Fn(&EventSample) -> bool| samples.iter().filter(|s| f(s)).count() as u64;
    let est = |f: &dyn Fn(&EventSample) -> bool| EstimateResult::wilson(count(f), total);
    let has_a = samples.iter().all(|s| s.a.is_some());
    EventEstimates {
        n,
        epsilon,
        a: has_a.then(|| est(&|s| s.a == Some(true))),
        b: est(&|s| s.b),
        c: est(&|s| s.c),
        d: est(&|s| s.d),
        connected: est(&|s| s.t_connect.is_some()),
        late_ring: est(&|s| s.late_ring),
        joint: est(&|s| s.t_connect.is_some() && s.late_ring),
        violations: Violations {
            a_not_b: count(&|s| s.a == Some(true) && !s.b),
            c_not_b: count(&|s| s.c && !s.b),
            b_not_c_not_d: count(&|s| s.b && !s.c && !s.d),
        },
    }
}

/// Coupled estimates of all events for every `n` of the configuration.
pub fn estimate_events(config: &EventConfig, exec: Execution) -> Result<Vec<EventEstimates>> {
    let rows = sample_events(config, exec)?;
    config.n_list.iter().zip(&rows).map(|(&n, row)| Ok(summarize_events(n, config.params(n)?.epsilon(), row))).collect()
}

fn single(params: EventParams, samples: u64, seed: u64, a_window: Option<Window>) -> Result<EventEstimates> {
    let config = EventConfig {
        x: params.x,
        phi: params.phi,
        delta: params.delta,
        n_list: vec![params.n],
        samples,
        seed,
        side: Side::Right,
        a_window,
    };
    Ok(estimate_events(&config, Execution::default())?.remove(0))
}

pub fn estimate_event_b(params: EventParams, samples: u64, seed: u64) -> Result<EstimateResult> {
    Ok(single(params, samples, seed, None)?.b)
}

pub fn estimate_event_c(params: EventParams, samples: u64, seed: u64) -> Result<EstimateResult> {
    Ok(single(params, samples, seed, None)?.c)
}

pub fn estimate_event_d(params: EventParams, samples: u64, seed: u64) -> Result<EstimateResult> {
    Ok(single(params, samples, seed, None)?.d)
}

pub fn estimate_event_a(params: EventParams, window: Window, samples: u64, seed: u64) -> Result<EstimateResult> {
    Ok(single(params, samples, seed, Some(window))?.a.expect("A is sampled when a window is given"))
}
