//! Seeded rate-1 Poisson clocks, one per lattice site.
//!
//! Clocks are counter based: the `i`-th inter-arrival gap of site `z` under
//! run seed `s` is a pure function of `(s, z, i)`. Any site can be sampled
//! without touching its neighbours, so windows are filled lazily and two
//! experiments that share a run seed see the same clock field.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SiteCoord;

/// Critical time `ln 2`, where the occupation probability reaches 1/2.
pub const T_C: f64 = LN_2;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49eb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit seed for sample `index` of stream `stream`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let a = mix64(base ^ GOLDEN_GAMMA);
    let b = mix64(a ^ stream.wrapping_mul(0xd6e8_feb8_6659_fd93));
    mix64(b ^ index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(0x2545_f491_4f6c_dd1d))
}

/// Maps 64 random bits to a uniform in `(0, 1]`.
#[inline]
fn unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub run_seed: u64,
    pub site: SiteCoord,
}

impl StreamKey {
    pub fn new(run_seed: u64, site: SiteCoord) -> Self {
        Self { run_seed, site }
    }

    fn hash(&self) -> u64 {
        let packed = ((self.site.k as u32 as u64) << 32) | self.site.l as u32 as u64;
        mix64(mix64(self.run_seed ^ 0x5851_f42d_4c95_7f2d) ^ mix64(packed.wrapping_add(GOLDEN_GAMMA)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horizon(f64);

impl Horizon {
    pub fn new(t_end: f64) -> Result<Self> {
        if t_end.is_finite() && t_end > 0.0 {
            Ok(Self(t_end))
        } else {
            Err(Error::InvalidParameter(format!("horizon must be positive, got {t_end}")))
        }
    }

    pub fn critical() -> Self {
        Self(T_C)
    }

    pub fn t_end(self) -> f64 {
        self.0
    }
}

impl Default for Horizon {
    fn default() -> Self {
        Self::critical()
    }
}

/// A field of independent clocks. Implementors only supply the gaps; jump
/// times are always their running sums so that every query over the same
/// site agrees on a common prefix.
pub trait ClockSource: Sync + Send {
    /// The `index`-th inter-arrival gap of `site`, strictly positive.
    fn gap(&self, site: SiteCoord, index: u32) -> f64;

    /// First jump time, unbounded.
    fn first_arrival(&self, site: SiteCoord) -> f64 {
        self.gap(site, 0)
    }

    fn first_arrival_within(&self, site: SiteCoord, horizon: Horizon) -> Option<f64> {
        let t = self.first_arrival(site);
        (t <= horizon.t_end()).then_some(t)
    }

    /// All jumps in `(from, to]`, increasing.
    fn jumps_in(&self, site: SiteCoord, from: f64, to: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = 0.0;
        for i in 0.. {
            t += self.gap(site, i);
            if t > to {
                break;
            }
            if t > from {
                out.push(t);
            }
        }
        out
    }

    /// First jump strictly after `after`, if it is at most `to`.
    fn next_jump_after(&self, site: SiteCoord, after: f64, to: f64) -> Option<f64> {
        let mut t = 0.0;
        for i in 0.. {
            t += self.gap(site, i);
            if t > to {
                return None;
            }
            if t > after {
                return Some(t);
            }
        }
        unreachable!()
    }

    fn has_jump_in(&self, site: SiteCoord, from: f64, to: f64) -> bool {
        self.next_jump_after(site, from, to).is_some()
    }
}

/// The production clock field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PoissonClocks {
    run_seed: u64,
}

impl PoissonClocks {
    pub fn new(run_seed: u64) -> Self {
        Self { run_seed }
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    pub fn key(&self, site: SiteCoord) -> StreamKey {
        StreamKey::new(self.run_seed, site)
    }
}

impl ClockSource for PoissonClocks {
    #[inline]
    fn gap(&self, site: SiteCoord, index: u32) -> f64 {
        let base = self.key(site).hash();
        let bits = mix64(base.wrapping_add((index as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
        -unit_open_closed(bits).ln()
    }
}

/// Reads the clock of the mirror-image site; used to evaluate left-hand
/// events through their right-hand counterparts.
#[derive(Clone, Copy, Debug)]
pub struct Reflected<C>(pub C);

impl<C: ClockSource> ClockSource for Reflected<C> {
    fn gap(&self, site: SiteCoord, index: u32) -> f64 {
        self.0.gap(site.reflect(), index)
    }
}

/// Deliberately broken clocks: every site shares one stream. Only useful as
/// a negative control for the verification suites.
#[derive(Clone, Copy, Debug)]
pub struct SharedStreamClocks {
    inner: PoissonClocks,
}

impl SharedStreamClocks {
    pub fn new(run_seed: u64) -> Self {
        Self { inner: PoissonClocks::new(run_seed) }
    }
}

impl ClockSource for SharedStreamClocks {
    fn gap(&self, _site: SiteCoord, index: u32) -> f64 {
        self.inner.gap(SiteCoord::ORIGIN, index)
    }
}

/// Either the real field or the negative-control stub, chosen at runtime.
#[derive(Clone, Copy, Debug)]
pub enum AnyClocks {
    Poisson(PoissonClocks),
    SharedStream(SharedStreamClocks),
}

impl ClockSource for AnyClocks {
    fn gap(&self, site: SiteCoord, index: u32) -> f64 {
        match self {
            AnyClocks::Poisson(c) => c.gap(site, index),
            AnyClocks::SharedStream(c) => c.gap(site, index),
        }
    }
}

pub fn first_arrival(key: StreamKey, horizon: Horizon) -> Option<f64> {
    PoissonClocks::new(key.run_seed).first_arrival_within(key.site, horizon)
}

pub fn jumps_in(key: StreamKey, from: f64, to: f64) -> Result<Vec<f64>> {
    if !(0.0 <= from && from < to) {
        return Err(Error::InvalidParameter(format!("need 0 <= from < to, got ({from}, {to}]")));
    }
    Ok(PoissonClocks::new(key.run_seed).jumps_in(key.site, from, to))
}
