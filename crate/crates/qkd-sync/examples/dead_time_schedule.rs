//! Builds the strided gating schedule that keeps a 45 ns dead-time SPAD
//! live for every gate, and prints the first few windows of each cycle.

use qkd_sync::spad_model::build_cycle_schedule;

fn main() -> qkd_sync::Result<()> {
    let schedule = build_cycle_schedule(524_288, 2.0, 45.0)?;
    println!("module width      {} ns", schedule.module_width_ns);
    println!("cycles            {}", schedule.cycles);
    println!("stride            {} windows", schedule.stride_windows);
    println!("windows per cycle {}", schedule.windows_per_cycle);
    for cycle in 0..4 {
        let head: Vec<String> = schedule
            .visit_order(cycle)
            .take(6)
            .map(|w| w.to_string())
            .collect();
        println!("cycle {cycle}: {} ...", head.join(", "));
    }
    println!(
        "gate pitch within a cycle: {} ns (>= 45 ns dead time)",
        schedule.stride_windows as f64 * 2.0
    );
    Ok(())
}
