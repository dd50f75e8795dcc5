//! Synchronization-phase modeling for two-pass fiber-optic quantum key
//! distribution.
//!
//! Before a QKD link can distribute key material, the receiver has to
//! find the arrival time of the attenuated synchronization pulse by
//! splitting the pulse repetition period into time windows and counting
//! detector events in each one. This crate models that search end to end:
//!
//! - [`link_timing`] — propagation speed, minimum frame period for a
//!   two-pass link, power-of-two window grids, attenuated signal levels,
//!   and total scan time.
//! - [`detection_stats`] — exact (series) and closed-form probabilities
//!   of picking the correct signal window under Poisson counting.
//! - [`spad_model`] — ideal-counter vs. Geiger-gated detector response
//!   and the strided gating schedule that keeps every gate outside the
//!   SPAD dead time.
//! - [`sync_simulator`] — deterministic parallel Monte Carlo for the
//!   two-stage window search, with analytic cross-checks.
//! - [`cli`] — the `qkd-sync` command-line front end.
//!
//! See the `examples/` directory for a runnable walkthrough of each
//! capability.

pub mod cli;
pub mod detection_stats;
pub mod error;
pub mod link_timing;
pub mod rng;
pub mod spad_model;
pub mod sync_simulator;

pub use error::{Error, Result};
