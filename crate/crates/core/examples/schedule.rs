// Switching angles and notch/pulse timing for a 50 Hz, three-pulse half cycle.
//
// Run with `cargo run --example schedule`.

use spwm::schedule::{build_schedule, pulse_width_deg, ModulationSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModulationSpec::new(3, 50.0, 1.0, 12.0)?;
    for i in 1..=spec.n_pulses {
        println!("P{i}: {:.3}°", pulse_width_deg(i, &spec)?);
    }

    let schedule = build_schedule(&spec)?;
    println!("\nsegment  kind   start_ms  duration_ms");
    for seg in schedule.segments() {
        println!(
            "{:>7}  {:<5} {:>9.4} {:>12.4}",
            seg.segment_index,
            seg.kind.as_str(),
            seg.start_ms,
            seg.duration_ms
        );
    }
    println!("half period: {:.6} ms", schedule.total_ms());

    // The middle pulse is twice as wide as the outer ones.
    assert!((schedule.pulse_ms[1] - 2.0 * schedule.pulse_ms[0]).abs() < 1e-12);

    // Lower K narrows every pulse around the same centres.
    let half = build_schedule(&ModulationSpec::new(3, 50.0, 0.5, 12.0)?)?;
    println!("\nK=0.5 rising edges: {:?}", half.angles.rising_deg);
    println!("K=0.5 falling edges: {:?}", half.angles.falling_deg);

    let mut csv = Vec::new();
    schedule.write_csv(&mut csv)?;
    println!("\n{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
