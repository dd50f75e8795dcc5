//! Analytic probability of picking the correct signal window.
//!
//! The decision rule is an argmax over accumulated per-window counts with
//! strict-inequality wins. Under Poisson counting the correct-detection
//! probability has an exact series form (signal count distribution times
//! the probability that every noise window stays strictly below it) and a
//! closed-form approximation valid for small mean window counts. Both are
//! evaluated here, together with the mean-count bookkeeping that feeds
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-window Poisson means of one full synchronization pass.
///
/// `mean_dark_counts` is the dark-count mean accumulated in any one window
/// over the whole sample (`N * xi_d * tau_w`); `mean_window_counts` adds
/// the signal contribution `N * n_s` on top of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStatistics {
    /// Windows per frame, >= 2.
    pub windows_per_frame: u64,
    /// Frames accumulated per window.
    pub sample_size: u64,
    /// Dark-count rate, Hz.
    pub dcp_rate_hz: f64,
    /// Window width, ns.
    pub window_width_ns: f64,
    /// Mean photoelectrons per pulse at the receiver.
    pub mean_signal_per_pulse: f64,
}

impl CountStatistics {
    pub fn new(
        windows_per_frame: u64,
        sample_size: u64,
        dcp_rate_hz: f64,
        window_width_ns: f64,
        mean_signal_per_pulse: f64,
    ) -> Result<Self> {
        if windows_per_frame < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 windows per frame, got {windows_per_frame}"
            )));
        }
        if sample_size == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        if !(dcp_rate_hz >= 0.0) || !(mean_signal_per_pulse >= 0.0) {
            return Err(Error::InvalidParameter(
                "dark-count rate and signal mean must be nonnegative".into(),
            ));
        }
        if !(window_width_ns > 0.0) {
            return Err(Error::InvalidParameter("window width must be positive".into()));
        }
        Ok(Self {
            windows_per_frame,
            sample_size,
            dcp_rate_hz,
            window_width_ns,
            mean_signal_per_pulse,
        })
    }

    /// Builds statistics directly from accumulated means, for callers that
    /// work in mean space rather than rates.
    pub fn from_means(
        windows_per_frame: u64,
        mean_dark_counts: f64,
        mean_window_counts: f64,
    ) -> Result<Self> {
        if !(mean_dark_counts >= 0.0) || mean_window_counts < mean_dark_counts {
            return Err(Error::InvalidParameter(
                "window mean must be >= dark mean >= 0".into(),
            ));
        }
        // One frame, 1 ns windows: the rate that reproduces the dark mean.
        Self::new(
            windows_per_frame,
            1,
            mean_dark_counts * 1e9,
            1.0,
            mean_window_counts - mean_dark_counts,
        )
    }

    /// Dark-count mean per window over the full sample, `N * xi_d * tau_w`.
    pub fn mean_dark_counts(&self) -> f64 {
        mean_dark_counts(self.sample_size, self.dcp_rate_hz, self.window_width_ns)
    }

    /// Signal-window mean over the full sample, `n_d + N * n_s`.
    pub fn mean_window_counts(&self) -> f64 {
        mean_window_counts(
            self.mean_dark_counts(),
            self.sample_size,
            self.mean_signal_per_pulse,
        )
    }
}

/// `N * xi_d * tau_w`, with the window width given in ns.
pub fn mean_dark_counts(sample_size: u64, dcp_rate_hz: f64, window_width_ns: f64) -> f64 {
    sample_size as f64 * dcp_rate_hz * window_width_ns * 1e-9
}

/// `n_d + N * n_s`.
pub fn mean_window_counts(mean_dark: f64, sample_size: u64, mean_signal_per_pulse: f64) -> f64 {
    mean_dark + sample_size as f64 * mean_signal_per_pulse
}

/// Truncation policy for the exact series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Stop once the remaining Poisson tail mass drops below this bound.
    pub tail_epsilon: f64,
    /// Give up (with a precision error) after this many terms.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            tail_epsilon: 1e-10,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn new(tail_epsilon: f64, max_terms: usize) -> Result<Self> {
        if !(tail_epsilon > 0.0) {
            return Err(Error::InvalidParameter("tail epsilon must be positive".into()));
        }
        if max_terms < 16 {
            return Err(Error::InvalidParameter("max terms must be at least 16".into()));
        }
        Ok(Self {
            tail_epsilon,
            max_terms,
        })
    }
}

/// Probability that every one of the `windows_per_frame - 1` noise windows
/// accumulates strictly fewer than `signal_count` dark counts:
/// `PoissonCdf(signal_count - 1; mean_dark) ^ (N_w - 1)`.
pub fn noise_margin_probability(signal_count: u32, mean_dark: f64, windows_per_frame: u64) -> f64 {
    debug_assert!(signal_count >= 1);
    if mean_dark == 0.0 {
        return 1.0;
    }
    let exponent = (windows_per_frame - 1) as f64;
    // CDF at signal_count - 1 by direct pmf accumulation.
    let mut pmf = (-mean_dark).exp();
    let mut cdf = pmf;
    for k in 1..signal_count {
        pmf *= mean_dark / k as f64;
        cdf += pmf;
    }
    let cdf = cdf.min(1.0);
    // cdf^(N_w - 1) in log space; both factors stay in [0, 1].
    (exponent * cdf.ln()).exp()
}

/// Exact series result with the truncation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactDetection {
    pub probability: f64,
    /// Number of series terms actually summed.
    pub terms: usize,
    /// Poisson tail mass left unsummed (bounds the truncation error).
    pub tail_bound: f64,
}

/// Exact correct-detection probability: sum over the signal-window count
/// `n >= 1` of `Poisson(n; mean_window) * noise_margin_probability(n)`.
///
/// The noise-margin factor is at most 1, so the discarded Poisson tail
/// mass bounds the truncation error; summation stops once that mass falls
/// below `control.tail_epsilon`.
pub fn detection_prob_exact(stats: &CountStatistics, control: &SeriesControl) -> Result<ExactDetection> {
    let mean_dark = stats.mean_dark_counts();
    let mean_window = stats.mean_window_counts();
    if mean_window == 0.0 {
        return Ok(ExactDetection {
            probability: 0.0,
            terms: 0,
            tail_bound: 0.0,
        });
    }

    let mut pmf = (-mean_window).exp(); // Poisson(0)
    let mut covered = pmf;
    let mut sum = 0.0;
    for n in 1..=control.max_terms {
        pmf *= mean_window / n as f64;
        covered += pmf;
        sum += pmf * noise_margin_probability(n as u32, mean_dark, stats.windows_per_frame);
        let tail = (1.0 - covered).max(0.0);
        if tail < control.tail_epsilon {
            return Ok(ExactDetection {
                probability: sum.clamp(0.0, 1.0),
                terms: n,
                tail_bound: tail,
            });
        }
    }
    Err(Error::PrecisionFailure {
        terms: control.max_terms,
        partial_sum: sum,
        tail_bound: (1.0 - covered).max(0.0),
        requested: control.tail_epsilon,
    })
}

/// Closed-form result with the applicability flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxDetection {
    pub probability: f64,
    /// Set when the mean window count is outside the small-mean regime the
    /// approximation was derived for (n_w >= 0.5).
    pub regime_warning: bool,
}

/// Closed-form correct-detection probability:
///
/// `P = exp(-(N_w - 1) * n_d) * [ n_w * exp(-n_w)
///      + (1 - exp(-n_w) - n_w * exp(-n_w)) * (1 + n_d)^(N_w - 1) ]`
///
/// The leading exponential and the `(1 + n_d)^(N_w - 1)` power are
/// combined in log space: for large frames both reach e^±25 or more and
/// naive evaluation loses most of the significand.
pub fn detection_prob_approx(stats: &CountStatistics) -> Result<ApproxDetection> {
    let mean_dark = stats.mean_dark_counts();
    let mean_window = stats.mean_window_counts();
    let windows = (stats.windows_per_frame - 1) as f64;

    let lead_log = -windows * mean_dark;
    let power_log = windows * mean_dark.ln_1p();
    let exp_neg_w = (-mean_window).exp();
    let single = mean_window * exp_neg_w;
    let multi = 1.0 - exp_neg_w - single;

    let p = lead_log.exp() * single + (lead_log + power_log).exp() * multi;
    if !p.is_finite() {
        return Err(Error::NumericRange(format!(
            "approximate detection probability is not finite (n_d={mean_dark}, n_w={mean_window})"
        )));
    }
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(Error::NumericRange(format!(
            "approximate detection probability {p} outside [0, 1]"
        )));
    }
    Ok(ApproxDetection {
        probability: p.clamp(0.0, 1.0),
        regime_warning: mean_window >= 0.5,
    })
}
