//! Stage-2 refinement: after the coarse window search, re-scan the three
//! windows around the hit at subinterval resolution to localize the pulse.

use qkd_sync::link_timing::TimingPlan;
use qkd_sync::spad_model::{DetectorMode, DetectorParams};
use qkd_sync::sync_simulator::{
    run_stage2_refine, PlacementPolicy, PulsePlacement, ScenarioConfig, Stage2Config,
};

fn main() -> qkd_sync::Result<()> {
    let config = ScenarioConfig {
        timing: TimingPlan::new(1.0, 2.0, 1024, 256, false)?,
        detector: DetectorParams::new(5.0, 0.0, DetectorMode::IdealCounter)?,
        schedule: None,
        naive_sequential: false,
        placement: PlacementPolicy::Fixed(PulsePlacement::Contained { window: 500 }),
        mean_signal_per_pulse: 0.05,
        trials: 1,
        master_seed: 7,
        stage2: Stage2Config::default(),
    };
    let stage2 = config.stage2;
    let span_subs = stage2.intervals * stage2.subintervals_per_interval;
    let sub_width = stage2.intervals as f64 * config.timing.window_width_ns / span_subs as f64;

    // True pulse position: 0.75 ns into window 500.
    let pulse_start_ns = 500.0 * config.timing.window_width_ns + 0.75;
    let coarse_window = 500;

    let mut rng = qkd_sync::rng::stream(config.master_seed, 0, 0);
    let refined = run_stage2_refine(&config, coarse_window, pulse_start_ns, &mut rng)?;
    let span_start = (coarse_window as f64 - 1.0) * config.timing.window_width_ns;
    println!("span: 3 windows, {span_subs} subintervals of {sub_width:.3} ns");
    println!("true pulse start: {:.3} ns into the span", pulse_start_ns - span_start);
    println!(
        "refined subinterval {refined} = [{:.3}, {:.3}) ns into the span",
        refined as f64 * sub_width,
        (refined + 1) as f64 * sub_width
    );
    Ok(())
}
