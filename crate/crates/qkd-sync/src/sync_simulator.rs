//! Monte Carlo engine for the two-stage signal-window search.
//!
//! Stage 1 accumulates per-window counts over the whole sample and picks
//! the window with the strictly largest total. Stage 2 re-scans the three
//! windows around the coarse result at subinterval resolution. Trials are
//! independent and draw from counter-based random streams, so a run is
//! bit-identical regardless of thread count.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection_stats::{self, CountStatistics, SeriesControl};
use crate::error::{Error, Result};
use crate::link_timing::TimingPlan;
use crate::rng;
use crate::spad_model::{window_response, CycleSchedule, DetectorMode, DetectorParams};

/// Where the pulse sits within the frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PulsePlacement {
    /// Pulse entirely inside one window.
    Contained { window: u64 },
    /// Pulse split across two adjacent windows; the second is
    /// `first_window + 1` modulo the frame.
    Straddling { first_window: u64, fraction_in_first: f64 },
}

impl PulsePlacement {
    fn validate(&self, windows_per_frame: u64) -> Result<()> {
        match *self {
            PulsePlacement::Contained { window } => {
                if window >= windows_per_frame {
                    return Err(Error::Config(format!(
                        "signal window {window} out of range (frame has {windows_per_frame})"
                    )));
                }
            }
            PulsePlacement::Straddling {
                first_window,
                fraction_in_first,
            } => {
                if first_window >= windows_per_frame {
                    return Err(Error::Config(format!(
                        "first signal window {first_window} out of range"
                    )));
                }
                if !(fraction_in_first > 0.0 && fraction_in_first < 1.0) {
                    return Err(Error::Config(format!(
                        "straddle fraction must be in (0,1), got {fraction_in_first}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Fixed placement for every trial, or a fresh uniform draw per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PlacementPolicy {
    Fixed(PulsePlacement),
    UniformRandom,
}

/// Stage-2 refinement geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Config {
    /// Time intervals (windows) scanned, signal window in the center.
    pub intervals: u32,
    pub subintervals_per_interval: u32,
    pub samples_per_subinterval: u32,
}

impl Default for Stage2Config {
    fn default() -> Self {
        Self {
            intervals: 3,
            subintervals_per_interval: 17,
            samples_per_subinterval: 800,
        }
    }
}

/// Full Monte Carlo scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub timing: TimingPlan,
    pub detector: DetectorParams,
    /// Strided gating order; `None` scans windows in index order.
    pub schedule: Option<CycleSchedule>,
    /// Model the unscheduled sequential scan where a Geiger registration
    /// blinds the following windows of the same frame.
    pub naive_sequential: bool,
    pub placement: PlacementPolicy,
    /// Mean photoelectrons per pulse at the receiver.
    pub mean_signal_per_pulse: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub stage2: Stage2Config,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("at least one trial required".into()));
        }
        if !(self.mean_signal_per_pulse >= 0.0) {
            return Err(Error::Config("signal mean must be nonnegative".into()));
        }
        if let PlacementPolicy::Fixed(p) = self.placement {
            p.validate(self.timing.windows_per_frame)?;
        }
        if let Some(s) = &self.schedule {
            if s.windows_per_frame != self.timing.windows_per_frame {
                return Err(Error::Config(format!(
                    "schedule built for {} windows but frame has {}",
                    s.windows_per_frame, self.timing.windows_per_frame
                )));
            }
        }
        if self.stage2.intervals == 0
            || self.stage2.subintervals_per_interval == 0
            || self.stage2.samples_per_subinterval == 0
        {
            return Err(Error::Config("stage-2 geometry must be positive".into()));
        }
        Ok(())
    }

    /// Per-frame dark-count mean in one window.
    fn dark_mean_per_frame(&self) -> f64 {
        self.detector.dcp_rate_hz * self.timing.window_width_ns * 1e-9
    }

    /// Dead-time cycle count for model-time accounting.
    fn cycles(&self) -> u64 {
        self.schedule.map_or(1, |s| s.cycles)
    }
}

/// Outcome of one stage-1 trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Window reported by the argmax rule; `None` when nothing counted.
    pub decided_window: Option<u64>,
    pub correct: bool,
    /// Accumulated count in the (best) signal window.
    pub signal_window_count: u64,
    /// Largest accumulated count over noise windows.
    pub max_noise_count: u64,
    /// The maximum count was shared by more than one window.
    pub tie_occurred: bool,
}

/// Aggregated stage-1 estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub estimated_p_d: f64,
    pub confidence_interval_95: (f64, f64),
    pub trials: u64,
    /// Exact analytic probability when the scenario is in the regime the
    /// series models (ideal counter, contained pulse).
    pub analytic_p_d: Option<f64>,
    /// Wall time the modeled hardware would spend: N * T_s * N_c.
    pub simulated_elapsed_model_time_ms: f64,
    /// How the interval was computed.
    pub ci_method: String,
}

/// Verdict of the strict-inequality argmax rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjudication {
    pub decided_window: Option<u64>,
    pub correct: bool,
    pub tie_occurred: bool,
}

/// Applies the decision rules to accumulated counts.
///
/// Contained pulse: correct iff the signal window counted at least once
/// and strictly exceeds every other window. Straddling pulse: correct iff
/// one signal window strictly beats both the other signal window and all
/// noise, or the two signal windows tie and that tied count strictly
/// beats all noise (the lower index is reported). Any noise window tying
/// or beating the best signal window is a failure.
pub fn adjudicate(counts: &[u64], placement: &PulsePlacement) -> Adjudication {
    let max = counts.iter().copied().max().unwrap_or(0);
    let argmax = counts.iter().position(|&c| c == max).unwrap_or(0) as u64;
    let tie_occurred = max > 0 && counts.iter().filter(|&&c| c == max).count() > 1;
    if max == 0 {
        return Adjudication {
            decided_window: None,
            correct: false,
            tie_occurred: false,
        };
    }

    match *placement {
        PulsePlacement::Contained { window } => {
            let signal = counts[window as usize];
            let noise_max = counts
                .iter()
                .enumerate()
                .filter(|&(i, _)| i as u64 != window)
                .map(|(_, &c)| c)
                .max()
                .unwrap_or(0);
            let correct = signal >= 1 && signal > noise_max;
            Adjudication {
                decided_window: Some(if correct { window } else { argmax }),
                correct,
                tie_occurred,
            }
        }
        PulsePlacement::Straddling { first_window, .. } => {
            let second = (first_window + 1) % counts.len() as u64;
            let c1 = counts[first_window as usize];
            let c2 = counts[second as usize];
            let noise_max = counts
                .iter()
                .enumerate()
                .filter(|&(i, _)| i as u64 != first_window && i as u64 != second)
                .map(|(_, &c)| c)
                .max()
                .unwrap_or(0);
            let best = c1.max(c2);
            let correct = best >= 1 && best > noise_max;
            let decided = if correct {
                // tie between the pair goes to the lower index
                Some(if c1 >= c2 { first_window } else { second })
            } else {
                Some(argmax)
            };
            Adjudication {
                decided_window: decided,
                correct,
                tie_occurred,
            }
        }
    }
}

fn draw_placement<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> PulsePlacement {
    match config.placement {
        PlacementPolicy::Fixed(p) => p,
        PlacementPolicy::UniformRandom => {
            let timing = &config.timing;
            let start = rng.sample(Uniform::new(0.0, timing.frame_period_ns));
            let window = (start / timing.window_width_ns) as u64 % timing.windows_per_frame;
            let boundary = (window + 1) as f64 * timing.window_width_ns;
            let end = start + timing.pulse_width_ns;
            if end <= boundary {
                PulsePlacement::Contained { window }
            } else {
                PulsePlacement::Straddling {
                    first_window: window,
                    fraction_in_first: (boundary - start) / timing.pulse_width_ns,
                }
            }
        }
    }
}

/// Per-frame signal means for the window(s) carrying pulse energy.
fn signal_means(config: &ScenarioConfig, placement: &PulsePlacement) -> Vec<(u64, f64)> {
    match *placement {
        PulsePlacement::Contained { window } => vec![(window, config.mean_signal_per_pulse)],
        PulsePlacement::Straddling {
            first_window,
            fraction_in_first,
        } => {
            let second = (first_window + 1) % config.timing.windows_per_frame;
            vec![
                (first_window, config.mean_signal_per_pulse * fraction_in_first),
                (second, config.mean_signal_per_pulse * (1.0 - fraction_in_first)),
            ]
        }
    }
}

/// Runs one stage-1 trial. Deterministic given `(master_seed, trial_index)`.
pub fn run_stage1_trial(config: &ScenarioConfig, trial_index: u64) -> TrialOutcome {
    let mut placement_rng = rng::stream(config.master_seed, trial_index, 0);
    let placement = draw_placement(config, &mut placement_rng);
    let signal = signal_means(config, &placement);

    let counts = if config.naive_sequential && config.detector.mode == DetectorMode::GeigerGated {
        accumulate_naive_sequential(config, &signal, trial_index)
    } else {
        accumulate_scheduled(config, &signal, trial_index)
    };

    let verdict = adjudicate(&counts, &placement);
    let signal_window_count = signal
        .iter()
        .map(|&(w, _)| counts[w as usize])
        .max()
        .unwrap_or(0);
    let max_noise_count = counts
        .iter()
        .enumerate()
        .filter(|&(i, _)| !signal.iter().any(|&(w, _)| w == i as u64))
        .map(|(_, &c)| c)
        .max()
        .unwrap_or(0);
    TrialOutcome {
        decided_window: verdict.decided_window,
        correct: verdict.correct,
        signal_window_count,
        max_noise_count,
        tie_occurred: verdict.tie_occurred,
    }
}

/// Scheduled (or ideal-scan) accumulation. Gate spacing absorbs the dead
/// time, so per-window totals over the `N` gated frames are independent:
/// Poisson for the ideal counter, Binomial for the one-count Geiger gate.
/// Sampling the totals directly is distribution-exact and avoids walking
/// every frame.
fn accumulate_scheduled(
    config: &ScenarioConfig,
    signal: &[(u64, f64)],
    trial_index: u64,
) -> Vec<u64> {
    let mut rng = rng::stream(config.master_seed, trial_index, 1);
    let windows = config.timing.windows_per_frame as usize;
    let frames = config.timing.sample_size;
    let dark = config.dark_mean_per_frame();
    let mut counts = vec![0u64; windows];

    if dark > 0.0 {
        match config.detector.mode {
            DetectorMode::IdealCounter => {
                let dist = Poisson::new(dark * frames as f64).expect("positive mean");
                for c in counts.iter_mut() {
                    *c = dist.sample(&mut rng) as u64;
                }
            }
            DetectorMode::GeigerGated => {
                let p = -(-dark).exp_m1();
                let dist = Binomial::new(frames, p).expect("probability in [0,1]");
                for c in counts.iter_mut() {
                    *c = dist.sample(&mut rng);
                }
            }
        }
    }
    // Signal windows: resample with the signal mean added on top of dark.
    for &(w, mean_signal) in signal {
        let mean = dark + mean_signal;
        counts[w as usize] =
            crate::spad_model::sample_poisson_like(mean, frames, config.detector.mode, &mut rng);
    }
    counts
}

/// Frame-by-frame sequential scan without the dead-time schedule: after a
/// Geiger registration the next `floor(tau_dead / tau_w)` windows of the
/// same frame return forced zeros.
fn accumulate_naive_sequential(
    config: &ScenarioConfig,
    signal: &[(u64, f64)],
    trial_index: u64,
) -> Vec<u64> {
    let windows = config.timing.windows_per_frame as usize;
    let frames = config.timing.sample_size;
    let dark = config.dark_mean_per_frame();
    let blind_span =
        (config.detector.dead_time_ns / config.timing.window_width_ns).floor() as usize;
    let mut counts = vec![0u64; windows];

    for frame in 0..frames {
        let mut rng = rng::stream(config.master_seed, trial_index, 1 + frame);
        let mut blind_until = 0usize; // exclusive window index
        for w in 0..windows {
            let mean = dark
                + signal
                    .iter()
                    .find(|&&(sw, _)| sw == w as u64)
                    .map_or(0.0, |&(_, m)| m);
            if w < blind_until {
                // detector still recovering; gate produces nothing
                continue;
            }
            let c = window_response(mean, DetectorMode::GeigerGated, &mut rng);
            if c > 0 {
                counts[w] += c;
                blind_until = w + 1 + blind_span;
            }
        }
    }
    counts
}

/// Runs all trials and aggregates the estimate. Trials execute in
/// parallel; the reduction is by trial index, so the report is identical
/// under any thread count.
pub fn estimate_detection_probability(config: &ScenarioConfig) -> Result<SimulationReport> {
    config.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_stage1_trial(config, t))
        .collect();

    let successes = outcomes.iter().filter(|o| o.correct).count() as u64;
    let n = config.trials as f64;
    let p = successes as f64 / n;
    // Normal-approximation interval with a continuity floor of 1/(2n) on
    // the half-width, clamped to [0, 1].
    let half = (1.96 * (p * (1.0 - p) / n).sqrt()).max(0.5 / n);
    let ci = ((p - half).max(0.0), (p + half).min(1.0));

    let analytic_p_d = match (config.detector.mode, config.placement) {
        (DetectorMode::IdealCounter, PlacementPolicy::Fixed(PulsePlacement::Contained { .. })) => {
            let stats = CountStatistics::new(
                config.timing.windows_per_frame,
                config.timing.sample_size,
                config.detector.dcp_rate_hz,
                config.timing.window_width_ns,
                config.mean_signal_per_pulse,
            )?;
            Some(detection_stats::detection_prob_exact(&stats, &SeriesControl::default())?.probability)
        }
        _ => None,
    };

    Ok(SimulationReport {
        estimated_p_d: p,
        confidence_interval_95: ci,
        trials: config.trials,
        analytic_p_d,
        simulated_elapsed_model_time_ms: config.timing.sample_size as f64
            * config.timing.frame_period_ns
            * 1e-6
            * config.cycles() as f64,
        ci_method: "normal approximation, 1.96 se, half-width floored at 1/(2n)".into(),
    })
}

/// Stage-2 refinement: re-scans the three windows centered on
/// `coarse_window` at subinterval resolution and returns the subinterval
/// index (within the span) with the largest accumulated count, lowest
/// index on ties. `pulse_start_ns` is the pulse's absolute position
/// within the frame; the span wraps modulo the frame at its edges.
pub fn run_stage2_refine<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    coarse_window: u64,
    pulse_start_ns: f64,
    rng: &mut R,
) -> Result<u64> {
    config.validate()?;
    let timing = &config.timing;
    if coarse_window >= timing.windows_per_frame {
        return Err(Error::Config(format!(
            "coarse window {coarse_window} out of range"
        )));
    }
    let tau_w = timing.window_width_ns;
    let frame = timing.frame_period_ns;
    let n_sub = (config.stage2.intervals * config.stage2.subintervals_per_interval) as u64;
    let span_len = config.stage2.intervals as f64 * tau_w;
    let sub_width = span_len / n_sub as f64;
    let half = (config.stage2.intervals / 2) as f64;
    // span starts half the interval count before the coarse window,
    // wrapped modulo the frame
    let span_start = (coarse_window as f64 - half) * tau_w;
    let rel_start = (pulse_start_ns - span_start).rem_euclid(frame);
    let pulse = (rel_start, rel_start + timing.pulse_width_ns);

    let dark_rate = config.detector.dcp_rate_hz;
    let mut best = (0u64, 0u64); // (index, count)
    let mut first = true;
    for j in 0..n_sub {
        let lo = j as f64 * sub_width;
        let hi = lo + sub_width;
        let overlap = (pulse.1.min(hi) - pulse.0.max(lo)).max(0.0);
        let mean = config.mean_signal_per_pulse * overlap / timing.pulse_width_ns
            + dark_rate * sub_width * 1e-9;
        let mut total = 0u64;
        for _ in 0..config.stage2.samples_per_subinterval {
            total += window_response(mean, config.detector.mode, rng);
        }
        if first || total > best.1 {
            best = (j, total);
            first = false;
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_timing::TimingPlan;
    use crate::spad_model::build_cycle_schedule;

    pub(crate) fn scenario(
        windows: u64,
        sample_size: u64,
        dcp_rate_hz: f64,
        mean_signal: f64,
        mode: DetectorMode,
        placement: PlacementPolicy,
    ) -> ScenarioConfig {
        let timing = TimingPlan::new(1.0, 2.0, windows, sample_size, false).unwrap();
        let dead = if mode == DetectorMode::GeigerGated { 45.0 } else { 0.0 };
        ScenarioConfig {
            timing,
            detector: DetectorParams::new(dcp_rate_hz, dead, mode).unwrap(),
            schedule: None,
            naive_sequential: false,
            placement,
            mean_signal_per_pulse: mean_signal,
            trials: 1000,
            master_seed: 0,
            stage2: Stage2Config::default(),
        }
    }

    #[test]
    fn adjudicate_examples() {
        let a = adjudicate(&[0, 0, 5, 0], &PulsePlacement::Contained { window: 2 });
        assert_eq!(a.decided_window, Some(2));
        assert!(a.correct);

        let a = adjudicate(
            &[3, 3, 0, 0],
            &PulsePlacement::Straddling {
                first_window: 0,
                fraction_in_first: 0.5,
            },
        );
        assert_eq!(a.decided_window, Some(0));
        assert!(a.correct);

        let a = adjudicate(&[2, 0, 2, 0], &PulsePlacement::Contained { window: 0 });
        assert_eq!(a.decided_window, Some(0));
        assert!(!a.correct);
        assert!(a.tie_occurred);

        let a = adjudicate(&[0, 0, 0], &PulsePlacement::Contained { window: 1 });
        assert_eq!(a.decided_window, None);
        assert!(!a.correct);
    }

    #[test]
    fn straddle_second_window_can_win() {
        let a = adjudicate(
            &[1, 4, 0, 0],
            &PulsePlacement::Straddling {
                first_window: 0,
                fraction_in_first: 0.3,
            },
        );
        assert_eq!(a.decided_window, Some(1));
        assert!(a.correct);
    }

    #[test]
    fn straddle_noise_tie_fails() {
        let a = adjudicate(
            &[2, 2, 2, 0],
            &PulsePlacement::Straddling {
                first_window: 0,
                fraction_in_first: 0.5,
            },
        );
        assert!(!a.correct);
    }

    #[test]
    fn silent_trial_is_a_miss() {
        let config = scenario(
            16,
            8,
            0.0,
            0.0,
            DetectorMode::IdealCounter,
            PlacementPolicy::Fixed(PulsePlacement::Contained { window: 3 }),
        );
        let outcome = run_stage1_trial(&config, 0);
        assert_eq!(outcome.decided_window, None);
        assert!(!outcome.correct);
    }

    #[test]
    fn strong_noiseless_signal_always_wins() {
        let config = scenario(
            16,
            8,
            0.0,
            10.0,
            DetectorMode::IdealCounter,
            PlacementPolicy::Fixed(PulsePlacement::Contained { window: 3 }),
        );
        for t in 0..200 {
            let outcome = run_stage1_trial(&config, t);
            assert!(outcome.correct);
            assert_eq!(outcome.decided_window, Some(3));
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let config = scenario(
            64,
            16,
            100.0,
            0.05,
            DetectorMode::IdealCounter,
            PlacementPolicy::UniformRandom,
        );
        for t in [0u64, 7, 123] {
            assert_eq!(run_stage1_trial(&config, t), run_stage1_trial(&config, t));
        }
    }

    #[test]
    fn report_is_identical_across_thread_counts() {
        let config = scenario(
            64,
            32,
            1000.0,
            0.05,
            DetectorMode::IdealCounter,
            PlacementPolicy::UniformRandom,
        );
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| estimate_detection_probability(&config)).unwrap();
        let r4 = pool4.install(|| estimate_detection_probability(&config)).unwrap();
        assert_eq!(r1, r4);
    }

    #[test]
    fn estimate_attaches_analytic_value_and_tracks_it() {
        let mut config = scenario(
            64,
            256,
            200.0,
            0.002,
            DetectorMode::IdealCounter,
            PlacementPolicy::Fixed(PulsePlacement::Contained { window: 10 }),
        );
        config.trials = 20_000;
        let report = estimate_detection_probability(&config).unwrap();
        let analytic = report.analytic_p_d.expect("regime supports analytic value");
        let se = (analytic * (1.0 - analytic) / config.trials as f64).sqrt();
        assert!(
            (report.estimated_p_d - analytic).abs() <= 3.0 * se,
            "mc {} vs analytic {analytic}",
            report.estimated_p_d
        );
    }

    #[test]
    fn perfect_scenario_estimates_one() {
        let mut config = scenario(
            16,
            8,
            0.0,
            20.0,
            DetectorMode::IdealCounter,
            PlacementPolicy::Fixed(PulsePlacement::Contained { window: 0 }),
        );
        config.trials = 500;
        let report = estimate_detection_probability(&config).unwrap();
        assert_eq!(report.estimated_p_d, 1.0);
        assert!(report.confidence_interval_95.1 <= 1.0);
    }

    #[test]
    fn geiger_never_beats_ideal() {
        for &(windows, dark_hz, signal) in
            &[(16u64, 1000.0, 0.01), (16, 10_000.0, 0.05), (64, 1000.0, 0.02)]
        {
            let mut ideal = scenario(
                windows,
                64,
                dark_hz,
                signal,
                DetectorMode::IdealCounter,
                PlacementPolicy::Fixed(PulsePlacement::Contained { window: 2 }),
            );
            ideal.trials = 20_000;
            let mut geiger = ideal;
            geiger.detector = DetectorParams::new(dark_hz, 45.0, DetectorMode::GeigerGated).unwrap();
            let ri = estimate_detection_probability(&ideal).unwrap();
            let rg = estimate_detection_probability(&geiger).unwrap();
            let se = (ri.estimated_p_d * (1.0 - ri.estimated_p_d) / 20_000.0).sqrt();
            assert!(
                rg.estimated_p_d <= ri.estimated_p_d + 3.0 * se,
                "geiger {} vs ideal {}",
                rg.estimated_p_d,
                ri.estimated_p_d
            );
        }
    }

    #[test]
    fn schedule_changes_time_not_statistics() {
        let mut config = scenario(
            64,
            32,
            1000.0,
            0.05,
            DetectorMode::GeigerGated,
            PlacementPolicy::Fixed(PulsePlacement::Contained { window: 5 }),
        );
        config.trials = 2000;
        let unscheduled = estimate_detection_probability(&config).unwrap();
        config.schedule = Some(build_cycle_schedule(64, 2.0, 45.0).unwrap());
        let scheduled = estimate_detection_probability(&config).unwrap();
        assert_eq!(unscheduled.estimated_p_d, scheduled.estimated_p_d);
        assert_eq!(
            scheduled.simulated_elapsed_model_time_ms,
            unscheduled.simulated_elapsed_model_time_ms * 32.0
        );
    }

    #[test]
    fn naive_sequential_blinds_later_windows() {
        // High dark rate: the naive scan keeps registering early windows
        // and going blind, losing counts relative to the scheduled scan.
        let mut config = scenario(
            64,
            64,
            5e6,
            0.5,
            DetectorMode::GeigerGated,
            PlacementPolicy::Fixed(PulsePlacement::Contained { window: 40 }),
        );
        config.trials = 2000;
        let scheduled = estimate_detection_probability(&config).unwrap();
        config.naive_sequential = true;
        let naive = estimate_detection_probability(&config).unwrap();
        let se = (scheduled.estimated_p_d * (1.0 - scheduled.estimated_p_d) / 2000.0)
            .sqrt()
            .max(1.0 / 4000.0);
        assert!(
            naive.estimated_p_d <= scheduled.estimated_p_d + 3.0 * se,
            "naive {} vs scheduled {}",
            naive.estimated_p_d,
            scheduled.estimated_p_d
        );
    }

    #[test]
    fn stage2_noiseless_localizes_pulse() {
        // Wide windows so the pulse fits inside two subintervals.
        let timing = TimingPlan::new(1.5, 17.0, 64, 16, true).unwrap();
        let config = ScenarioConfig {
            timing,
            detector: DetectorParams::new(0.0, 0.0, DetectorMode::IdealCounter).unwrap(),
            schedule: None,
            naive_sequential: false,
            placement: PlacementPolicy::Fixed(PulsePlacement::Contained { window: 10 }),
            mean_signal_per_pulse: 5.0,
            trials: 1,
            master_seed: 3,
            stage2: Stage2Config::default(),
        };
        // Span covers windows 9..12, i.e. [153, 204) ns; subinterval width
        // is 1 ns. Put the pulse inside subintervals 25..=26 of the span.
        let pulse_start = 153.0 + 25.2;
        let mut rng = rng::stream(3, 0, 99);
        let idx = run_stage2_refine(&config, 10, pulse_start, &mut rng).unwrap();
        assert!(idx == 25 || idx == 26, "got {idx}");
    }

    #[test]
    fn stage2_boundary_pulse_picks_adjacent_subinterval() {
        let timing = TimingPlan::new(1.0, 17.0, 64, 16, true).unwrap();
        let config = ScenarioConfig {
            timing,
            detector: DetectorParams::new(0.0, 0.0, DetectorMode::IdealCounter).unwrap(),
            schedule: None,
            naive_sequential: false,
            placement: PlacementPolicy::Fixed(PulsePlacement::Contained { window: 10 }),
            mean_signal_per_pulse: 5.0,
            trials: 1,
            master_seed: 4,
            stage2: Stage2Config::default(),
        };
        // Pulse of width 1 ns centered exactly on the subinterval boundary
        // at 26 ns into the span: equal overlap with 25 and 26.
        let pulse_start = 153.0 + 25.5;
        for c in 0..20 {
            let mut rng = rng::stream(4, c, 7);
            let idx = run_stage2_refine(&config, 10, pulse_start, &mut rng).unwrap();
            assert!(idx == 25 || idx == 26, "got {idx}");
        }
    }

    #[test]
    fn stage2_wraps_at_frame_edge() {
        let timing = TimingPlan::new(1.5, 17.0, 64, 16, true).unwrap();
        let config = ScenarioConfig {
            timing,
            detector: DetectorParams::new(0.0, 0.0, DetectorMode::IdealCounter).unwrap(),
            schedule: None,
            naive_sequential: false,
            placement: PlacementPolicy::Fixed(PulsePlacement::Contained { window: 0 }),
            mean_signal_per_pulse: 5.0,
            trials: 1,
            master_seed: 5,
            stage2: Stage2Config::default(),
        };
        // Coarse window 0: span starts at window 63 (wrapped). Pulse near
        // the start of window 0 lands in the middle interval of the span.
        let mut rng = rng::stream(5, 0, 0);
        let idx = run_stage2_refine(&config, 0, 2.0, &mut rng).unwrap();
        assert!((17..34).contains(&(idx as u32)), "got {idx}");
    }

    #[test]
    fn uniform_placement_straddles_sometimes() {
        let config = scenario(
            64,
            16,
            0.0,
            0.1,
            DetectorMode::IdealCounter,
            PlacementPolicy::UniformRandom,
        );
        let mut contained = 0;
        let mut straddling = 0;
        for t in 0..500 {
            let mut rng = rng::stream(config.master_seed, t, 0);
            match draw_placement(&config, &mut rng) {
                PulsePlacement::Contained { .. } => contained += 1,
                PulsePlacement::Straddling {
                    fraction_in_first, ..
                } => {
                    assert!(fraction_in_first > 0.0 && fraction_in_first < 1.0);
                    straddling += 1;
                }
            }
        }
        // tau_s / tau_w = 0.5: about half the draws straddle
        assert!(contained > 100 && straddling > 100);
    }
}
