//! Command-line front end: `plan`, `prob`, `simulate`, `schedule`, `sweep`.
//!
//! Parameters come from flags or a flat `key = value` config file, with
//! flags taking precedence. Reports go to stdout or a file as a
//! human-readable table, CSV, or JSON. Exit codes: 0 success, 2
//! usage/configuration error, 3 numeric-precision failure.

mod configfile;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::detection_stats::{self, CountStatistics, SeriesControl};
use crate::error::{Error, Result};
use crate::link_timing::{self, FiberLink, TimingPlan};
use crate::spad_model::{build_cycle_schedule, DetectorMode, DetectorParams};
use crate::sync_simulator::{
    estimate_detection_probability, PlacementPolicy, PulsePlacement, ScenarioConfig, Stage2Config,
};

use configfile::ConfigMap;
use output::{emit, Fields, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// Parses a real number, accepting both `.` and `,` decimal separators.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    s.replace(',', ".")
        .parse::<f64>()
        .map_err(|e| format!("invalid number {s:?}: {e}"))
}

#[derive(Parser)]
#[command(
    name = "qkd-sync",
    version,
    about = "Synchronization-phase toolkit for two-pass fiber-optic QKD links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design frame timing from physical link parameters
    Plan(PlanArgs),
    /// Evaluate analytic detection probabilities
    Prob(ProbArgs),
    /// Monte Carlo estimate of the detection probability
    Simulate(SimulateArgs),
    /// Dead-time-safe gating schedule
    Schedule(ScheduleArgs),
    /// Sweep one parameter and emit a probability table
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat key = value config file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted or "-"
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Master random seed (overrides the QKD_SYNC_SEED env var)
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl CommonArgs {
    fn resolve_seed(&self, cfg: &ConfigMap) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        if let Some(v) = cfg.get_u64("seed")? {
            return Ok(v);
        }
        match std::env::var("QKD_SYNC_SEED") {
            Ok(v) => v
                .parse::<u64>()
                .map_err(|e| Error::Config(format!("QKD_SYNC_SEED={v:?} is not a seed: {e}"))),
            Err(_) => Ok(0),
        }
    }
}

const COMMON_KEYS: &[&str] = &["seed"];

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Prob(args) => cmd_prob(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::PrecisionFailure { .. } | Error::NumericRange(_) => 3,
                _ => 2,
            }
        }
    }
}

// ---------------------------------------------------------------- plan

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// One-way fiber length, km
    #[arg(long, value_parser = parse_real)]
    length_km: Option<f64>,
    /// Fiber core refractive index
    #[arg(long, value_parser = parse_real)]
    refractive_index: Option<f64>,
    /// Optical pulse width, ns
    #[arg(long, value_parser = parse_real)]
    pulse_width_ns: Option<f64>,
    /// Window width, ns (overrides --window-multiplier)
    #[arg(long, value_parser = parse_real)]
    window_width_ns: Option<f64>,
    /// Window width as a multiple of the pulse width (valid range 2..4)
    #[arg(long, value_parser = parse_real)]
    window_multiplier: Option<f64>,
    /// Keep the raw window count instead of rounding up to a power of two
    #[arg(long)]
    no_round: bool,
    /// Frames per window
    #[arg(long)]
    sample_size: Option<u64>,
    /// Mean photons per pulse at the source
    #[arg(long, value_parser = parse_real)]
    source_mean_photons: Option<f64>,
    /// One-way loss, dB
    #[arg(long, value_parser = parse_real)]
    loss_db: Option<f64>,
    /// Dead-time cycles included in the total scan time
    #[arg(long)]
    cycles: Option<u64>,
    /// Use the CODATA light speed instead of 300000 km/s
    #[arg(long)]
    physical_c: bool,
    /// Accept window widths outside 2..4 pulse widths
    #[arg(long)]
    allow_out_of_criterion: bool,
}

const PLAN_KEYS: &[&str] = &[
    "length-km",
    "refractive-index",
    "pulse-width-ns",
    "window-width-ns",
    "window-multiplier",
    "no-round",
    "sample-size",
    "source-mean-photons",
    "loss-db",
    "cycles",
    "physical-c",
    "allow-out-of-criterion",
];

/// Rounds up to a single significant decimal digit (978 -> 1000), the
/// "round engineering period" a designer would pick before gridding.
fn round_up_one_significant(x: f64) -> f64 {
    if x <= 0.0 {
        return x;
    }
    let scale = 10f64.powf(x.log10().floor());
    (x / scale).ceil() * scale
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.common.config.as_deref(), PLAN_KEYS, COMMON_KEYS)?;
    let length_km = cfg.require_f64("length-km", args.length_km)?;
    let refractive_index = cfg.require_f64("refractive-index", args.refractive_index)?;
    let pulse_width_ns = cfg.f64_or("pulse-width-ns", args.pulse_width_ns, 1.0)?;
    let multiplier = cfg.f64_or("window-multiplier", args.window_multiplier, 2.0)?;
    let window_width_ns = match cfg.opt_f64("window-width-ns", args.window_width_ns)? {
        Some(w) => w,
        None => multiplier * pulse_width_ns,
    };
    let round = !cfg.bool_or("no-round", args.no_round)?;
    let sample_size = cfg.u64_or("sample-size", args.sample_size, 256)?;
    let source_mean_photons = cfg.f64_or("source-mean-photons", args.source_mean_photons, 0.1)?;
    let loss_db = cfg.f64_or("loss-db", args.loss_db, 20.0)?;
    let cycles = cfg.u64_or("cycles", args.cycles, 1)?;
    let physical_c = cfg.bool_or("physical-c", args.physical_c)?;
    let allow = cfg.bool_or("allow-out-of-criterion", args.allow_out_of_criterion)?;

    if !allow {
        let ratio = window_width_ns / pulse_width_ns;
        if !(2.0..=4.0).contains(&ratio) {
            return Err(Error::InvalidParameter(format!(
                "window width is {ratio} pulse widths, outside the 2..4 criterion \
                 (pass --allow-out-of-criterion to override)"
            )));
        }
    }

    let link = FiberLink::new(length_km, refractive_index, loss_db)?;
    let light_speed = if physical_c {
        link_timing::PHYSICAL_LIGHT_SPEED_KM_S
    } else {
        link_timing::LIGHT_SPEED_KM_S
    };
    let speed = link_timing::propagation_speed_with(light_speed, refractive_index)?;
    let min_period_us = link_timing::min_frame_period_us(&link, speed)?;
    let nominal_period_us = round_up_one_significant(min_period_us);
    let frame = link_timing::plan_frame(nominal_period_us, window_width_ns, round)?;
    let mean_signal = link_timing::mean_signal_level(source_mean_photons, loss_db)?;
    let total_ms =
        link_timing::total_sync_time_ms(sample_size, frame.frame_period_ns * 1e-6, cycles)?;
    let growth_percent = (frame.growth_ratio - 1.0) * 100.0;

    let mut fields = Fields::new("plan");
    fields.push_f64("propagation_speed_km_s", speed, format!("{speed:.0}"));
    fields.push_f64("min_frame_period_us", min_period_us, format!("{min_period_us:.1}"));
    fields.push_f64(
        "nominal_period_us",
        nominal_period_us,
        format!("{nominal_period_us:.1}"),
    );
    fields.push_u64("windows_raw", frame.windows_raw);
    fields.push_u64("windows_per_frame", frame.windows_per_frame);
    fields.push_f64(
        "frame_period_ns",
        frame.frame_period_ns,
        format!("{:.0}", frame.frame_period_ns),
    );
    fields.push_f64(
        "pulse_rate_hz",
        frame.pulse_rate_hz,
        format!("{:.2}", frame.pulse_rate_hz),
    );
    fields.push_f64("frame_growth_percent", growth_percent, format!("{growth_percent:.2}"));
    fields.push_f64("mean_signal_per_pulse", mean_signal, format!("{mean_signal:.6}"));
    fields.push_f64("total_sync_time_ms", total_ms, format!("{total_ms:.3}"));
    fields.push_u64("sample_size", sample_size);
    fields.push_u64("cycles", cycles);
    emit(&args.common.output, args.common.format, &fields)
}

// ---------------------------------------------------------------- prob

#[derive(Args)]
struct ProbArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Windows per frame
    #[arg(long)]
    windows: Option<u64>,
    /// Frames per window
    #[arg(long)]
    sample_size: Option<u64>,
    /// Dark-count rate, Hz
    #[arg(long, value_parser = parse_real)]
    dcp_rate_hz: Option<f64>,
    /// Window width, ns
    #[arg(long, value_parser = parse_real)]
    window_width_ns: Option<f64>,
    /// Mean photoelectrons per pulse at the receiver
    #[arg(long, value_parser = parse_real)]
    signal_mean: Option<f64>,
    /// Series truncation: stop when the Poisson tail falls below this
    #[arg(long, value_parser = parse_real)]
    tail_epsilon: Option<f64>,
    /// Series truncation: give up after this many terms
    #[arg(long)]
    max_terms: Option<u64>,
}

const PROB_KEYS: &[&str] = &[
    "windows",
    "sample-size",
    "dcp-rate-hz",
    "window-width-ns",
    "signal-mean",
    "tail-epsilon",
    "max-terms",
];

struct ProbPoint {
    mean_dark: f64,
    mean_window: f64,
    p_exact: f64,
    exact_terms: usize,
    exact_tail: f64,
    p_approx: f64,
    rel_gap: f64,
    regime_warning: bool,
}

fn evaluate_probabilities(stats: &CountStatistics, control: &SeriesControl) -> Result<ProbPoint> {
    let exact = detection_stats::detection_prob_exact(stats, control)?;
    let approx = detection_stats::detection_prob_approx(stats)?;
    let rel_gap = if exact.probability > 0.0 {
        (exact.probability - approx.probability).abs() / exact.probability
    } else {
        0.0
    };
    Ok(ProbPoint {
        mean_dark: stats.mean_dark_counts(),
        mean_window: stats.mean_window_counts(),
        p_exact: exact.probability,
        exact_terms: exact.terms,
        exact_tail: exact.tail_bound,
        p_approx: approx.probability,
        rel_gap,
        regime_warning: approx.regime_warning,
    })
}

fn cmd_prob(args: ProbArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.common.config.as_deref(), PROB_KEYS, COMMON_KEYS)?;
    let windows = cfg.require_u64("windows", args.windows)?;
    let sample_size = cfg.u64_or("sample-size", args.sample_size, 256)?;
    let dcp_rate_hz = cfg.f64_or("dcp-rate-hz", args.dcp_rate_hz, 5.0)?;
    let window_width_ns = cfg.f64_or("window-width-ns", args.window_width_ns, 2.0)?;
    let signal_mean = cfg.f64_or("signal-mean", args.signal_mean, 0.001)?;
    let tail_epsilon = cfg.f64_or("tail-epsilon", args.tail_epsilon, 1e-10)?;
    let max_terms = cfg.u64_or("max-terms", args.max_terms, 10_000)? as usize;

    let stats = CountStatistics::new(windows, sample_size, dcp_rate_hz, window_width_ns, signal_mean)?;
    let control = SeriesControl::new(tail_epsilon, max_terms)?;
    let point = evaluate_probabilities(&stats, &control)?;

    let mut fields = Fields::new("prob");
    fields.push_f64("mean_dark_counts", point.mean_dark, format!("{:.6e}", point.mean_dark));
    fields.push_f64(
        "mean_window_counts",
        point.mean_window,
        format!("{:.6}", point.mean_window),
    );
    fields.push_f64(
        "p_exact",
        point.p_exact,
        format!("{:.2}%", point.p_exact * 100.0),
    );
    fields.push_u64("exact_terms", point.exact_terms as u64);
    fields.push_f64("exact_tail_bound", point.exact_tail, format!("{:.2e}", point.exact_tail));
    fields.push_f64(
        "p_approx",
        point.p_approx,
        format!("{:.2}%", point.p_approx * 100.0),
    );
    fields.push_f64("rel_gap", point.rel_gap, format!("{:.4e}", point.rel_gap));
    fields.push_bool("regime_warning", point.regime_warning);
    emit(&args.common.output, args.common.format, &fields)
}

// ---------------------------------------------------------------- simulate

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DetectorKind {
    Ideal,
    Geiger,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PlacementKind {
    Contained,
    Straddling,
    Uniform,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Windows per frame
    #[arg(long)]
    windows: Option<u64>,
    /// Window width, ns
    #[arg(long, value_parser = parse_real)]
    window_width_ns: Option<f64>,
    /// Pulse width, ns
    #[arg(long, value_parser = parse_real)]
    pulse_width_ns: Option<f64>,
    /// Frames per window
    #[arg(long)]
    sample_size: Option<u64>,
    /// Dark-count rate, Hz
    #[arg(long, value_parser = parse_real)]
    dcp_rate_hz: Option<f64>,
    /// Mean photoelectrons per pulse at the receiver
    #[arg(long, value_parser = parse_real)]
    signal_mean: Option<f64>,
    /// Detector model
    #[arg(long, value_enum)]
    detector: Option<DetectorKind>,
    /// SPAD recovery time, ns
    #[arg(long, value_parser = parse_real)]
    dead_time_ns: Option<f64>,
    /// Gate windows in dead-time-safe strided cycles
    #[arg(long)]
    use_schedule: bool,
    /// Model the unscheduled sequential scan (Geiger only)
    #[arg(long)]
    naive_sequential: bool,
    /// Also run the naive sequential scan and emit a second row
    #[arg(long)]
    compare_naive: bool,
    /// Pulse placement
    #[arg(long, value_enum)]
    placement: Option<PlacementKind>,
    /// Signal window index for fixed placements
    #[arg(long)]
    signal_window: Option<u64>,
    /// Energy fraction in the first window for straddling placement
    #[arg(long, value_parser = parse_real)]
    fraction_in_first: Option<f64>,
    /// Monte Carlo trials
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads (0 = rayon default)
    #[arg(long)]
    parallel: Option<u64>,
    /// Accept window widths outside 2..4 pulse widths
    #[arg(long)]
    allow_out_of_criterion: bool,
}

const SIMULATE_KEYS: &[&str] = &[
    "windows",
    "window-width-ns",
    "pulse-width-ns",
    "sample-size",
    "dcp-rate-hz",
    "signal-mean",
    "detector",
    "dead-time-ns",
    "use-schedule",
    "naive-sequential",
    "compare-naive",
    "placement",
    "signal-window",
    "fraction-in-first",
    "trials",
    "parallel",
    "allow-out-of-criterion",
];

fn in_thread_pool<T: Send>(threads: u64, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads as usize)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.common.config.as_deref(), SIMULATE_KEYS, COMMON_KEYS)?;
    let windows = cfg.require_u64("windows", args.windows)?;
    let window_width_ns = cfg.f64_or("window-width-ns", args.window_width_ns, 2.0)?;
    let pulse_width_ns = cfg.f64_or("pulse-width-ns", args.pulse_width_ns, 1.0)?;
    let sample_size = cfg.u64_or("sample-size", args.sample_size, 256)?;
    let dcp_rate_hz = cfg.f64_or("dcp-rate-hz", args.dcp_rate_hz, 5.0)?;
    let signal_mean = cfg.f64_or("signal-mean", args.signal_mean, 0.001)?;
    let dead_time_ns = cfg.f64_or("dead-time-ns", args.dead_time_ns, 45.0)?;
    let trials = cfg.u64_or("trials", args.trials, 10_000)?;
    let parallel = cfg.u64_or("parallel", args.parallel, 0)?;
    let signal_window = cfg.u64_or("signal-window", args.signal_window, 0)?;
    let fraction = cfg.f64_or("fraction-in-first", args.fraction_in_first, 0.5)?;
    let allow = cfg.bool_or("allow-out-of-criterion", args.allow_out_of_criterion)?;
    let use_schedule = cfg.bool_or("use-schedule", args.use_schedule)?;
    let naive_sequential = cfg.bool_or("naive-sequential", args.naive_sequential)?;
    let compare_naive = cfg.bool_or("compare-naive", args.compare_naive)?;
    let seed = args.common.resolve_seed(&cfg)?;

    let detector_kind = match cfg.string("detector")?.as_deref() {
        _ if args.detector.is_some() => args.detector.unwrap(),
        Some("ideal") => DetectorKind::Ideal,
        Some("geiger") => DetectorKind::Geiger,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown detector {other:?}, expected ideal or geiger"
            )))
        }
        None => DetectorKind::Ideal,
    };
    let placement_kind = match cfg.string("placement")?.as_deref() {
        _ if args.placement.is_some() => args.placement.unwrap(),
        Some("contained") => PlacementKind::Contained,
        Some("straddling") => PlacementKind::Straddling,
        Some("uniform") => PlacementKind::Uniform,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown placement {other:?}, expected contained, straddling or uniform"
            )))
        }
        None => PlacementKind::Contained,
    };

    let timing = TimingPlan::new(pulse_width_ns, window_width_ns, windows, sample_size, allow)?;
    let detector = match detector_kind {
        DetectorKind::Ideal => DetectorParams::new(dcp_rate_hz, 0.0, DetectorMode::IdealCounter)?,
        DetectorKind::Geiger => {
            DetectorParams::new(dcp_rate_hz, dead_time_ns, DetectorMode::GeigerGated)?
        }
    };
    let placement = match placement_kind {
        PlacementKind::Contained => PlacementPolicy::Fixed(PulsePlacement::Contained {
            window: signal_window,
        }),
        PlacementKind::Straddling => PlacementPolicy::Fixed(PulsePlacement::Straddling {
            first_window: signal_window,
            fraction_in_first: fraction,
        }),
        PlacementKind::Uniform => PlacementPolicy::UniformRandom,
    };
    let schedule = if use_schedule {
        Some(build_cycle_schedule(windows, window_width_ns, detector.dead_time_ns)?)
    } else {
        None
    };
    let base = ScenarioConfig {
        timing,
        detector,
        schedule,
        naive_sequential,
        placement,
        mean_signal_per_pulse: signal_mean,
        trials,
        master_seed: seed,
        stage2: Stage2Config::default(),
    };

    let mut runs = vec![("scheduled", base)];
    if naive_sequential {
        runs[0].0 = "naive";
    }
    if compare_naive {
        let mut naive = base;
        naive.naive_sequential = true;
        runs.push(("naive", naive));
    }

    let reports = in_thread_pool(parallel, move || -> Result<Vec<_>> {
        runs.iter()
            .map(|(label, config)| Ok((*label, estimate_detection_probability(config)?)))
            .collect()
    })??;

    let mut fields = Fields::new("simulate");
    for (label, report) in &reports {
        fields.start_row();
        fields.push_str("run", label);
        fields.push_f64(
            "p_mc",
            report.estimated_p_d,
            format!("{:.2}%", report.estimated_p_d * 100.0),
        );
        fields.push_f64(
            "ci_low",
            report.confidence_interval_95.0,
            format!("{:.6}", report.confidence_interval_95.0),
        );
        fields.push_f64(
            "ci_high",
            report.confidence_interval_95.1,
            format!("{:.6}", report.confidence_interval_95.1),
        );
        fields.push_u64("trials", report.trials);
        match report.analytic_p_d {
            Some(p) => fields.push_f64("p_analytic", p, format!("{:.2}%", p * 100.0)),
            None => fields.push_str("p_analytic", ""),
        }
        fields.push_f64(
            "model_time_ms",
            report.simulated_elapsed_model_time_ms,
            format!("{:.3}", report.simulated_elapsed_model_time_ms),
        );
        fields.push_str("ci_method", &report.ci_method);
        if report.trials == 1 {
            fields.push_str("note", "degenerate interval: single trial");
        }
    }
    emit(&args.common.output, args.common.format, &fields)
}

// ---------------------------------------------------------------- schedule

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Windows per frame (power of two)
    #[arg(long)]
    windows: Option<u64>,
    /// Window width, ns
    #[arg(long, value_parser = parse_real)]
    window_width_ns: Option<f64>,
    /// SPAD recovery time, ns
    #[arg(long, value_parser = parse_real)]
    dead_time_ns: Option<f64>,
    /// Dump every (cycle, position, window) row instead of the summary
    #[arg(long)]
    full: bool,
}

const SCHEDULE_KEYS: &[&str] = &["windows", "window-width-ns", "dead-time-ns", "full"];

fn cmd_schedule(args: ScheduleArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.common.config.as_deref(), SCHEDULE_KEYS, COMMON_KEYS)?;
    let windows = cfg.require_u64("windows", args.windows)?;
    let window_width_ns = cfg.f64_or("window-width-ns", args.window_width_ns, 2.0)?;
    let dead_time_ns = cfg.f64_or("dead-time-ns", args.dead_time_ns, 45.0)?;
    let full = cfg.bool_or("full", args.full)?;

    let schedule = build_cycle_schedule(windows, window_width_ns, dead_time_ns)?;

    let mut fields = Fields::new("schedule");
    if full {
        for cycle in 0..schedule.cycles {
            for (position, window) in schedule.visit_order(cycle).enumerate() {
                fields.start_row();
                fields.push_u64("cycle", cycle);
                fields.push_u64("position", position as u64);
                fields.push_u64("window", window);
            }
        }
    } else {
        fields.push_f64(
            "module_width_ns",
            schedule.module_width_ns,
            format!("{:.0}", schedule.module_width_ns),
        );
        fields.push_u64("cycles", schedule.cycles);
        fields.push_u64("stride_windows", schedule.stride_windows);
        fields.push_u64("windows_per_cycle", schedule.windows_per_cycle);
        for cycle in 0..schedule.cycles.min(3) {
            let head: Vec<String> = schedule
                .visit_order(cycle)
                .take(5)
                .map(|w| w.to_string())
                .collect();
            fields.push_str(&format!("cycle_{cycle}_first_windows"), &head.join(" "));
        }
    }
    emit(&args.common.output, args.common.format, &fields)
}

// ---------------------------------------------------------------- sweep

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SweepAxis {
    /// Frames per window (N)
    SampleSize,
    /// Dark-count rate (Hz)
    DcpRateHz,
    /// Mean photoelectrons per pulse
    SignalMean,
    /// Windows per frame
    Windows,
    /// One-way loss (dB), converted through the source photon mean
    LossDb,
}

impl SweepAxis {
    fn name(&self) -> &'static str {
        match self {
            SweepAxis::SampleSize => "sample-size",
            SweepAxis::DcpRateHz => "dcp-rate-hz",
            SweepAxis::SignalMean => "signal-mean",
            SweepAxis::Windows => "windows",
            SweepAxis::LossDb => "loss-db",
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Parameter to sweep
    #[arg(long, value_enum)]
    axis: Option<SweepAxis>,
    /// First axis value
    #[arg(long, value_parser = parse_real)]
    from: Option<f64>,
    /// Last axis value
    #[arg(long, value_parser = parse_real)]
    to: Option<f64>,
    /// Number of sweep points (>= 2)
    #[arg(long)]
    steps: Option<u64>,
    /// Windows per frame at the base point
    #[arg(long)]
    windows: Option<u64>,
    /// Frames per window at the base point
    #[arg(long)]
    sample_size: Option<u64>,
    /// Dark-count rate at the base point, Hz
    #[arg(long, value_parser = parse_real)]
    dcp_rate_hz: Option<f64>,
    /// Window width, ns
    #[arg(long, value_parser = parse_real)]
    window_width_ns: Option<f64>,
    /// Signal mean at the base point
    #[arg(long, value_parser = parse_real)]
    signal_mean: Option<f64>,
    /// Source photon mean, used by the loss-db axis
    #[arg(long, value_parser = parse_real)]
    source_mean_photons: Option<f64>,
    /// Also run a Monte Carlo estimate per point
    #[arg(long)]
    mc: bool,
    /// Trials per Monte Carlo point
    #[arg(long)]
    trials: Option<u64>,
}

const SWEEP_KEYS: &[&str] = &[
    "axis",
    "from",
    "to",
    "steps",
    "windows",
    "sample-size",
    "dcp-rate-hz",
    "window-width-ns",
    "signal-mean",
    "source-mean-photons",
    "mc",
    "trials",
];

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.common.config.as_deref(), SWEEP_KEYS, COMMON_KEYS)?;
    let axis = match (args.axis, cfg.string("axis")?) {
        (Some(a), _) => a,
        (None, Some(name)) => SweepAxis::from_str(&name, true)
            .map_err(|_| Error::Config(format!("unknown sweep axis {name:?}")))?,
        (None, None) => return Err(Error::Config("missing required parameter axis".into())),
    };
    let from = cfg.require_f64("from", args.from)?;
    let to = cfg.require_f64("to", args.to)?;
    let steps = cfg.u64_or("steps", args.steps, 2)?;
    if steps < 2 {
        return Err(Error::Config("sweep needs at least 2 steps".into()));
    }
    let windows = cfg.u64_or("windows", args.windows, 524_288)?;
    let sample_size = cfg.u64_or("sample-size", args.sample_size, 256)?;
    let dcp_rate_hz = cfg.f64_or("dcp-rate-hz", args.dcp_rate_hz, 5.0)?;
    let window_width_ns = cfg.f64_or("window-width-ns", args.window_width_ns, 2.0)?;
    let signal_mean = cfg.f64_or("signal-mean", args.signal_mean, 0.001)?;
    let source_mean = cfg.f64_or("source-mean-photons", args.source_mean_photons, 0.1)?;
    let mc = cfg.bool_or("mc", args.mc)?;
    let trials = cfg.u64_or("trials", args.trials, 10_000)?;
    let seed = args.common.resolve_seed(&cfg)?;

    let mut fields = Fields::new("sweep");
    for step in 0..steps {
        let value = from + (to - from) * step as f64 / (steps - 1) as f64;
        let mut w = windows;
        let mut n = sample_size;
        let mut dark = dcp_rate_hz;
        let mut signal = signal_mean;
        match axis {
            SweepAxis::SampleSize => n = value.round() as u64,
            SweepAxis::DcpRateHz => dark = value,
            SweepAxis::SignalMean => signal = value,
            SweepAxis::Windows => w = value.round() as u64,
            SweepAxis::LossDb => signal = link_timing::mean_signal_level(source_mean, value)?,
        }
        let stats = CountStatistics::new(w, n, dark, window_width_ns, signal)?;
        let point = evaluate_probabilities(&stats, &SeriesControl::default())?;

        fields.start_row();
        fields.push_str("parameter", axis.name());
        fields.push_f64("value", value, format!("{value}"));
        fields.push_f64("p_exact", point.p_exact, format!("{:.6}", point.p_exact));
        fields.push_f64("p_approx", point.p_approx, format!("{:.6}", point.p_approx));
        fields.push_f64("rel_gap", point.rel_gap, format!("{:.4e}", point.rel_gap));
        if mc {
            let timing = TimingPlan::new(window_width_ns / 2.0, window_width_ns, w, n, true)?;
            let config = ScenarioConfig {
                timing,
                detector: DetectorParams::new(dark, 0.0, DetectorMode::IdealCounter)?,
                schedule: None,
                naive_sequential: false,
                placement: PlacementPolicy::Fixed(PulsePlacement::Contained { window: 0 }),
                mean_signal_per_pulse: signal,
                trials,
                master_seed: seed,
                stage2: Stage2Config::default(),
            };
            let report = estimate_detection_probability(&config)?;
            fields.push_f64(
                "p_mc",
                report.estimated_p_d,
                format!("{:.6}", report.estimated_p_d),
            );
            fields.push_f64(
                "mc_ci_low",
                report.confidence_interval_95.0,
                format!("{:.6}", report.confidence_interval_95.0),
            );
            fields.push_f64(
                "mc_ci_high",
                report.confidence_interval_95.1,
                format!("{:.6}", report.confidence_interval_95.1),
            );
        } else {
            fields.push_str("p_mc", "");
            fields.push_str("mc_ci_low", "");
            fields.push_str("mc_ci_high", "");
        }
    }
    emit(&args.common.output, args.common.format, &fields)
}
