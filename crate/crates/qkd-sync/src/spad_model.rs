//! Detector response and dead-time-safe gating.
//!
//! A gated SPAD in Geiger mode registers at most one event per gate and
//! then needs `tau_dead` to recover. Scanning windows strictly in order
//! would leave the detector blind right after every registration, so the
//! frame is covered in strided cycles instead: pick a module length
//! `tau_m >= tau_dead`, gate every `N_c = tau_m / tau_w`-th window within
//! a cycle, and shift the start by one window per cycle. Consecutive gates
//! of one cycle are then always at least a dead time apart.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a gated window converts incident events into a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorMode {
    /// Records every primary event; no recovery time.
    IdealCounter,
    /// Registers only the first event per gate, then needs dead time.
    GeigerGated,
}

/// SPAD characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Dark-count rate, Hz.
    pub dcp_rate_hz: f64,
    /// Recovery time after a registration, ns. Ignored by IdealCounter.
    pub dead_time_ns: f64,
    pub mode: DetectorMode,
}

impl DetectorParams {
    pub fn new(dcp_rate_hz: f64, dead_time_ns: f64, mode: DetectorMode) -> Result<Self> {
        if !(dcp_rate_hz >= 0.0) || !(dead_time_ns >= 0.0) {
            return Err(Error::InvalidParameter(
                "dark-count rate and dead time must be nonnegative".into(),
            ));
        }
        if mode == DetectorMode::GeigerGated && !(dead_time_ns > 0.0) {
            return Err(Error::InvalidParameter(
                "Geiger-gated detectors require a positive dead time".into(),
            ));
        }
        Ok(Self {
            dcp_rate_hz,
            dead_time_ns,
            mode,
        })
    }
}

/// Strided gating order that keeps every gate outside dead time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSchedule {
    /// Module length tau_m, ns.
    pub module_width_ns: f64,
    /// Number of cycles N_c = tau_m / tau_w.
    pub cycles: u64,
    /// Index stride between consecutive gates of one cycle (= N_c).
    pub stride_windows: u64,
    /// Gates per cycle (= N_w / N_c).
    pub windows_per_cycle: u64,
    /// Windows per frame this schedule covers.
    pub windows_per_frame: u64,
}

impl CycleSchedule {
    /// Window indices gated in cycle `cycle` (zero-based), in gating
    /// order: `cycle, cycle + stride, cycle + 2*stride, ...`.
    pub fn visit_order(&self, cycle: u64) -> impl Iterator<Item = u64> + '_ {
        assert!(cycle < self.cycles, "cycle {cycle} out of range");
        (0..self.windows_per_cycle).map(move |i| cycle + i * self.stride_windows)
    }
}

/// Builds the dead-time-safe schedule: `tau_m` is the smallest
/// power-of-two multiple of `tau_w` that is >= `tau_dead` (just `tau_w`
/// when the dead time is zero).
pub fn build_cycle_schedule(
    windows_per_frame: u64,
    window_width_ns: f64,
    dead_time_ns: f64,
) -> Result<CycleSchedule> {
    if windows_per_frame < 2 || !windows_per_frame.is_power_of_two() {
        return Err(Error::Config(format!(
            "windows per frame must be a power of two >= 2, got {windows_per_frame}"
        )));
    }
    if !(window_width_ns > 0.0) || !(dead_time_ns >= 0.0) {
        return Err(Error::Config(
            "window width must be positive and dead time nonnegative".into(),
        ));
    }
    let mut cycles: u64 = 1;
    while (cycles as f64) * window_width_ns < dead_time_ns {
        cycles = cycles
            .checked_mul(2)
            .ok_or_else(|| Error::Config("dead time too large for any schedule".into()))?;
    }
    if windows_per_frame % cycles != 0 {
        return Err(Error::Config(format!(
            "frame of {windows_per_frame} windows is not divisible into {cycles} cycles"
        )));
    }
    Ok(CycleSchedule {
        module_width_ns: cycles as f64 * window_width_ns,
        cycles,
        stride_windows: cycles,
        windows_per_cycle: windows_per_frame / cycles,
        windows_per_frame,
    })
}

/// Gate activation delay `Z_t = T_s/4 * (A_n - 1) + tau_w * (B_n - 1)`.
pub fn gating_delay(
    frame_period_ns: f64,
    window_width_ns: f64,
    activation_index: u64,
    frame_index: u64,
) -> Result<f64> {
    if activation_index < 1 || frame_index < 1 {
        return Err(Error::InvalidParameter(
            "activation and frame indices are one-based".into(),
        ));
    }
    Ok(frame_period_ns / 4.0 * (activation_index - 1) as f64
        + window_width_ns * (frame_index - 1) as f64)
}

/// Count registered in one gated window during one frame, given the
/// Poisson mean of primary events (photoelectrons + dark counts) in the
/// gate.
pub fn window_response<R: Rng + ?Sized>(mean_counts: f64, mode: DetectorMode, rng: &mut R) -> u64 {
    sample_poisson_like(mean_counts, 1, mode, rng)
}

/// Count accumulated over `frames` independent gates of the same window.
/// IdealCounter totals are Poisson with the summed mean; Geiger totals
/// are Binomial(frames, 1 - exp(-mean)) since each gate clips to one.
pub fn sample_poisson_like<R: Rng + ?Sized>(
    mean_per_frame: f64,
    frames: u64,
    mode: DetectorMode,
    rng: &mut R,
) -> u64 {
    if mean_per_frame <= 0.0 || frames == 0 {
        return 0;
    }
    match mode {
        DetectorMode::IdealCounter => {
            let total = mean_per_frame * frames as f64;
            Poisson::new(total).expect("positive mean").sample(rng) as u64
        }
        DetectorMode::GeigerGated => {
            let p = -(-mean_per_frame).exp_m1(); // 1 - e^-mean
            Binomial::new(frames, p).expect("probability in [0,1]").sample(rng)
        }
    }
}
