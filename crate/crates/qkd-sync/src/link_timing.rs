//! Link propagation and frame timing design.
//!
//! Turns the physical channel (fiber length, refractive index, loss budget)
//! into the timing geometry of the synchronization search: minimum pulse
//! repetition period for a two-pass link, window count per frame, pulse
//! rate, attenuated signal level, and total scan time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used for link arithmetic, km/s. Kept at the round
/// engineering value; see [`PHYSICAL_LIGHT_SPEED_KM_S`] for the CODATA one.
pub const LIGHT_SPEED_KM_S: f64 = 300_000.0;

/// CODATA vacuum light speed, km/s. Opt-in alternative to
/// [`LIGHT_SPEED_KM_S`].
pub const PHYSICAL_LIGHT_SPEED_KM_S: f64 = 299_792.458;

/// Physical channel between the two stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberLink {
    /// One-way fiber length, km.
    pub length_km: f64,
    /// Group refractive index of the fiber core.
    pub refractive_index: f64,
    /// Total one-way loss over the link, dB.
    pub loss_db: f64,
}

impl FiberLink {
    pub fn new(length_km: f64, refractive_index: f64, loss_db: f64) -> Result<Self> {
        if !(length_km > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fiber length must be positive, got {length_km} km"
            )));
        }
        if !(refractive_index > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "refractive index must exceed 1, got {refractive_index}"
            )));
        }
        if !(loss_db >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "loss must be nonnegative, got {loss_db} dB"
            )));
        }
        Ok(Self {
            length_km,
            refractive_index,
            loss_db,
        })
    }
}

/// Frame and window geometry of the synchronization scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingPlan {
    /// Optical pulse width, ns.
    pub pulse_width_ns: f64,
    /// Time window width, ns.
    pub window_width_ns: f64,
    /// Windows per frame.
    pub windows_per_frame: u64,
    /// Frame period, ns.
    pub frame_period_ns: f64,
    /// Pulse repetition rate, Hz.
    pub pulse_rate_hz: f64,
    /// Frames accumulated per window before the argmax decision.
    pub sample_size: u64,
}

impl TimingPlan {
    /// Builds a plan and checks its internal consistency. The
    /// window-to-pulse criterion (window width between 2 and 4 pulse
    /// widths) is enforced unless `allow_out_of_criterion` is set.
    pub fn new(
        pulse_width_ns: f64,
        window_width_ns: f64,
        windows_per_frame: u64,
        sample_size: u64,
        allow_out_of_criterion: bool,
    ) -> Result<Self> {
        if !(pulse_width_ns > 0.0) || !(window_width_ns > 0.0) {
            return Err(Error::InvalidParameter(
                "pulse and window widths must be positive".into(),
            ));
        }
        if windows_per_frame == 0 || sample_size == 0 {
            return Err(Error::InvalidParameter(
                "window count and sample size must be positive".into(),
            ));
        }
        if !allow_out_of_criterion {
            let ratio = window_width_ns / pulse_width_ns;
            if !(2.0..=4.0).contains(&ratio) {
                return Err(Error::InvalidParameter(format!(
                    "window width must be 2..4 pulse widths, got ratio {ratio}"
                )));
            }
        }
        let frame_period_ns = windows_per_frame as f64 * window_width_ns;
        if windows_per_frame >= 2 && !(window_width_ns < frame_period_ns) {
            return Err(Error::InvalidParameter(
                "window width must be smaller than the frame period".into(),
            ));
        }
        let pulse_rate_hz = 1e9 / frame_period_ns;
        Ok(Self {
            pulse_width_ns,
            window_width_ns,
            windows_per_frame,
            frame_period_ns,
            pulse_rate_hz,
            sample_size,
        })
    }
}

/// Signal speed in the fiber, km/s, for the given group index.
pub fn propagation_speed(refractive_index: f64) -> Result<f64> {
    propagation_speed_with(LIGHT_SPEED_KM_S, refractive_index)
}

/// Same as [`propagation_speed`] but with an explicit light-speed constant
/// (use [`PHYSICAL_LIGHT_SPEED_KM_S`] for CODATA arithmetic).
pub fn propagation_speed_with(light_speed_km_s: f64, refractive_index: f64) -> Result<f64> {
    if !(refractive_index >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "refractive index must be >= 1, got {refractive_index}"
        )));
    }
    Ok(light_speed_km_s / refractive_index)
}

/// Minimum pulse repetition period, in microseconds, for a two-pass link:
/// the round trip 2L/v, below which counter-propagating pulses overlap.
pub fn min_frame_period_us(link: &FiberLink, speed_km_s: f64) -> Result<f64> {
    if !(speed_km_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "propagation speed must be positive, got {speed_km_s}"
        )));
    }
    // 2L/v is in seconds with km and km/s; convert to us.
    Ok(2.0 * link.length_km / speed_km_s * 1e6)
}

/// Result of fitting a window grid over a minimum frame period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePlan {
    /// ceil(min_period / window width), before any rounding.
    pub windows_raw: u64,
    /// Final window count (power of two when rounding is on).
    pub windows_per_frame: u64,
    /// Final frame period, ns.
    pub frame_period_ns: f64,
    /// Pulse rate 1/T_s, Hz.
    pub pulse_rate_hz: f64,
    /// Final period divided by the requested minimum.
    pub growth_ratio: f64,
}

/// Divides the minimum frame period into windows. With
/// `round_to_power_of_two` the window count is rounded UP to the next
/// power of two (the period may only grow, never shrink below the
/// two-pass minimum).
pub fn plan_frame(
    min_period_us: f64,
    window_width_ns: f64,
    round_to_power_of_two: bool,
) -> Result<FramePlan> {
    if !(min_period_us > 0.0) || !(window_width_ns > 0.0) {
        return Err(Error::InvalidParameter(
            "minimum period and window width must be positive".into(),
        ));
    }
    let min_period_ns = min_period_us * 1e3;
    let windows_raw = (min_period_ns / window_width_ns).ceil() as u64;
    let windows_per_frame = if round_to_power_of_two {
        windows_raw.next_power_of_two()
    } else {
        windows_raw
    };
    let frame_period_ns = windows_per_frame as f64 * window_width_ns;
    Ok(FramePlan {
        windows_raw,
        windows_per_frame,
        frame_period_ns,
        pulse_rate_hz: 1e9 / frame_period_ns,
        growth_ratio: frame_period_ns / min_period_ns,
    })
}

/// Mean photoelectrons per pulse at the receiver after `loss_db` of
/// attenuation.
pub fn mean_signal_level(source_mean_photons: f64, loss_db: f64) -> Result<f64> {
    if !(source_mean_photons >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "source photon mean must be nonnegative, got {source_mean_photons}"
        )));
    }
    if !(loss_db >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "loss must be nonnegative, got {loss_db} dB"
        )));
    }
    Ok(source_mean_photons * 10f64.powf(-loss_db / 10.0))
}

/// Total wall time of one full synchronization pass, ms:
/// `sample_size` frames per window, times the frame period, times the
/// number of dead-time cycles.
pub fn total_sync_time_ms(sample_size: u64, frame_period_ms: f64, cycles: u64) -> Result<f64> {
    if sample_size == 0 || cycles == 0 || !(frame_period_ms > 0.0) {
        return Err(Error::InvalidParameter(
            "sample size, frame period and cycle count must be positive".into(),
        ));
    }
    Ok(sample_size as f64 * frame_period_ms * cycles as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn speed_matches_published_roundings() {
        let v = propagation_speed(1.49).unwrap();
        assert_relative_eq!(v, 201_000.0, max_relative = 0.005);
        let v = propagation_speed(1.4670).unwrap();
        assert_relative_eq!(v, 205_000.0, max_relative = 0.005);
        assert_eq!(propagation_speed(1.0).unwrap(), 300_000.0);
    }

    #[test]
    fn speed_rejects_sub_unity_index() {
        assert!(propagation_speed(0.9).is_err());
    }

    #[test]
    fn min_period_round_trip() {
        let link = FiberLink::new(100.0, 1.4670, 20.0).unwrap();
        let t = min_frame_period_us(&link, 204_499.0).unwrap();
        assert_relative_eq!(t, 978.0, max_relative = 0.01);

        let t = min_frame_period_us(&link, 201_342.0).unwrap();
        assert_relative_eq!(t, 993.0, max_relative = 0.01);

        let short = FiberLink::new(0.001, 1.5, 0.0).unwrap();
        let t = min_frame_period_us(&short, 200_000.0).unwrap();
        assert_relative_eq!(t, 0.01, max_relative = 1e-9); // 2 * 1 m / 2e5 km/s = 10 ns
    }

    #[test]
    fn frame_plan_power_of_two_example() {
        let plan = plan_frame(1000.0, 2.0, true).unwrap();
        assert_eq!(plan.windows_raw, 500_000);
        assert_eq!(plan.windows_per_frame, 524_288);
        assert_eq!(plan.frame_period_ns, 1_048_576.0);
        assert!((plan.pulse_rate_hz - 954.0).abs() < 1.0);
        assert!(plan.growth_ratio <= 1.05);

        let plan = plan_frame(1000.0, 2.0, false).unwrap();
        assert_eq!(plan.windows_per_frame, 500_000);

        let plan = plan_frame(2e-3, 2.0, true).unwrap();
        assert_eq!(plan.windows_per_frame, 1);
    }

    #[test]
    fn signal_level_examples() {
        assert_relative_eq!(mean_signal_level(0.1, 20.0).unwrap(), 0.001);
        assert_relative_eq!(mean_signal_level(0.1, 0.0).unwrap(), 0.1);
        assert_relative_eq!(mean_signal_level(1.0, 10.0).unwrap(), 0.1);
    }

    #[test]
    fn total_time_examples() {
        assert_relative_eq!(total_sync_time_ms(256, 1.05, 1).unwrap(), 268.8);
        assert_relative_eq!(total_sync_time_ms(256, 1.05, 32).unwrap(), 8601.6);
        assert_relative_eq!(total_sync_time_ms(1, 1.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn plan_criterion_enforcement() {
        assert!(TimingPlan::new(1.0, 5.0, 16, 4, false).is_err());
        assert!(TimingPlan::new(1.0, 5.0, 16, 4, true).is_ok());
        assert!(TimingPlan::new(1.0, 2.0, 16, 4, false).is_ok());
    }

    proptest! {
        #[test]
        fn rounded_plan_is_power_of_two_and_covers(
            min_period_us in 1e-3..1e5f64,
            window_ns in 0.1..100.0f64,
        ) {
            let plan = plan_frame(min_period_us, window_ns, true).unwrap();
            prop_assert!(plan.windows_per_frame.is_power_of_two());
            prop_assert!(plan.frame_period_ns >= min_period_us * 1e3 - 1e-6);
            prop_assert!(plan.growth_ratio >= 1.0 - 1e-12);
        }

        #[test]
        fn speed_decreases_with_index(n1 in 1.0..3.0f64, dn in 1e-6..1.0f64) {
            let v1 = propagation_speed(n1).unwrap();
            let v2 = propagation_speed(n1 + dn).unwrap();
            prop_assert!(v2 < v1);
        }

        #[test]
        fn loss_is_additive_in_db(mu in 0.0..10.0f64, a in 0.0..30.0f64, b in 0.0..30.0f64) {
            let direct = mean_signal_level(mu, a + b).unwrap();
            let chained = mean_signal_level(mean_signal_level(mu, a).unwrap(), b).unwrap();
            prop_assert!((direct - chained).abs() <= 1e-12 * direct.max(1e-300));
        }

        #[test]
        fn sync_time_is_multiplicative(n in 1u64..1000, t in 0.1..10.0f64, c in 1u64..64) {
            let base = total_sync_time_ms(n, t, 1).unwrap();
            let scaled = total_sync_time_ms(n, t, c).unwrap();
            prop_assert!((scaled - base * c as f64).abs() < 1e-9 * scaled);
        }
    }
}
