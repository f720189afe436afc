//! Two-tier ultra-dense cellular network toolkit: a stochastic-geometry
//! Monte Carlo simulator for link spectral efficiency, matching closed-form
//! bounds and dense-network asymptotics, a 3D-blockage model that turns
//! building statistics into a LOS range, and an uplink/downlink bandwidth
//! allocator under a PAPR constraint.
//!
//! The crate is organized bottom-up:
//! - [`numeric`]: quadrature and deterministic summation
//! - [`geometry`]: point processes, association, scheduling
//! - [`blockage`]: building statistics -> LOS range
//! - [`channel`]: per-link SIR assembly
//! - [`analytic`]: exact integrals, bounds, asymptotes
//! - [`montecarlo`]: seeded, parallel SE estimation
//! - [`allocator`]: PAPR-capped uplink/downlink bandwidth split
//! - [`config`]: strict TOML run configuration

pub mod allocator;
pub mod analytic;
pub mod blockage;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod numeric;

pub use error::{Error, Result};
