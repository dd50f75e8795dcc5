//! Evaluates the exact series and the closed-form approximation of the
//! correct-detection probability over a few operating points.

use qkd_sync::detection_stats::{
    detection_prob_approx, detection_prob_exact, CountStatistics, SeriesControl,
};

fn main() -> qkd_sync::Result<()> {
    let control = SeriesControl::default();
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>9}", "N", "xi_d (Hz)", "n_s", "P exact", "P approx", "rel gap");
    for (sample_size, dcp_rate_hz, signal) in [
        (256u64, 5.0, 0.001),
        (1024, 5.0, 0.001),
        (1024, 25.0, 0.01),
    ] {
        let stats = CountStatistics::new(524_288, sample_size, dcp_rate_hz, 2.0, signal)?;
        let exact = detection_prob_exact(&stats, &control)?;
        let approx = detection_prob_approx(&stats)?;
        let gap = (exact.probability - approx.probability).abs() / exact.probability;
        println!(
            "{:>6} {:>10} {:>10} {:>9.2}% {:>9.2}% {:>9.1e}{}",
            sample_size,
            dcp_rate_hz,
            signal,
            exact.probability * 100.0,
            approx.probability * 100.0,
            gap,
            if approx.regime_warning { "  (outside small-mean regime)" } else { "" },
        );
    }
    Ok(())
}
