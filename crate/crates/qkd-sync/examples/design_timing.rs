//! Designs the frame timing for a 100 km two-pass link: propagation
//! speed, minimum repetition period, power-of-two window grid, received
//! signal level, and total scan time.

use qkd_sync::link_timing::{
    mean_signal_level, min_frame_period_us, plan_frame, propagation_speed, total_sync_time_ms,
    FiberLink,
};

fn main() -> qkd_sync::Result<()> {
    let link = FiberLink::new(100.0, 1.4670, 20.0)?;
    let speed = propagation_speed(link.refractive_index)?;
    let min_period = min_frame_period_us(&link, speed)?;
    println!("propagation speed     {speed:.0} km/s");
    println!("min frame period      {min_period:.1} us (two-pass round trip)");

    // Grid a rounded 1 ms period into 2 ns windows, window count rounded
    // up to a power of two.
    let frame = plan_frame(1000.0, 2.0, true)?;
    println!("raw window count      {}", frame.windows_raw);
    println!("windows per frame     {} (2^{})", frame.windows_per_frame, frame.windows_per_frame.trailing_zeros());
    println!("frame period          {:.0} ns", frame.frame_period_ns);
    println!("pulse rate            {:.1} Hz", frame.pulse_rate_hz);
    println!("frame growth          {:.2} %", (frame.growth_ratio - 1.0) * 100.0);

    let signal = mean_signal_level(0.1, link.loss_db)?;
    println!("signal at receiver    {signal} photoelectrons/pulse");

    let total = total_sync_time_ms(256, frame.frame_period_ns * 1e-6, 1)?;
    println!("scan time (N=256)     {total:.1} ms");
    let total_dead_time = total_sync_time_ms(256, frame.frame_period_ns * 1e-6, 32)?;
    println!("scan time (32 cycles) {total_dead_time:.1} ms");
    Ok(())
}
