//! Simulation and estimation toolkit for the half-plane forest-fire process
//! on the triangular lattice and the site percolation that drives it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clocks;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod firesim;
pub mod lattice;
pub mod percolation;

pub use clocks::{ClockSource, Horizon, PoissonClocks, StreamKey, T_C};
pub use error::{Error, Result};
pub use exec::Execution;
pub use lattice::{ConeRegion, Point, Region, RhombusSurface, SiteCoord, TubeRegion, Window};
