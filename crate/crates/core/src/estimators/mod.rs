//! Monte-Carlo drivers, interval estimates and regressions.

pub mod borel;
pub mod events;
pub mod heights;
pub mod onearm;
pub mod stats;
pub mod tables;

pub use borel::{borel_cantelli_report, BorelCantelliReport, Verdict};
pub use events::{
    default_a_window, estimate_event_a, estimate_event_b, estimate_event_c, estimate_event_d, estimate_events,
    sample_events, EventConfig, EventEstimates, EventParams, EventSample, Side, Violations, DEFAULT_DELTA,
};
pub use heights::{height_distribution, region_window, HeightConfig, HeightDistribution, HeightSample};
pub use onearm::{
    estimate_one_arm, estimate_one_arm_splitting, fit_correlation_length, fit_xi_exponent, fit_xi_from_estimates,
    scan_xi_exponent, OneArmSampler, SplittingConfig, XiFit, XiOptions, XiScan,
};
pub use stats::{quantile, EstimateResult, FitResult, QuantileEstimate, Transform};

/// Stream identifiers for seed derivation, one per experiment family.
pub(crate) mod streams {
    pub const ONE_ARM: u64 = 1;
    pub const SPLITTING: u64 = 2;
    pub const EVENTS: u64 = 3;
    pub const HEIGHTS: u64 = 4;
}
