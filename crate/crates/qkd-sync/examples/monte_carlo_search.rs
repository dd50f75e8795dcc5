//! Monte Carlo estimate of the stage-1 detection probability with the
//! analytic series attached as a cross-check.

use qkd_sync::link_timing::TimingPlan;
use qkd_sync::spad_model::{DetectorMode, DetectorParams};
use qkd_sync::sync_simulator::{
    estimate_detection_probability, PlacementPolicy, PulsePlacement, ScenarioConfig, Stage2Config,
};

fn main() -> qkd_sync::Result<()> {
    let config = ScenarioConfig {
        timing: TimingPlan::new(1.0, 2.0, 4096, 256, false)?,
        detector: DetectorParams::new(200.0, 0.0, DetectorMode::IdealCounter)?,
        schedule: None,
        naive_sequential: false,
        placement: PlacementPolicy::Fixed(PulsePlacement::Contained { window: 1000 }),
        mean_signal_per_pulse: 0.002,
        trials: 50_000,
        master_seed: 1,
        stage2: Stage2Config::default(),
    };
    let report = estimate_detection_probability(&config)?;
    println!("trials        {}", report.trials);
    println!(
        "P_D estimate  {:.4} (95% CI {:.4} .. {:.4})",
        report.estimated_p_d, report.confidence_interval_95.0, report.confidence_interval_95.1
    );
    if let Some(analytic) = report.analytic_p_d {
        println!("P_D analytic  {analytic:.4}");
    }
    println!("model time    {:.1} ms", report.simulated_elapsed_model_time_ms);
    Ok(())
}
