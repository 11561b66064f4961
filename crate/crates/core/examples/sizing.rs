// PV array and battery bank for a light, a fan/TV and a pump.
//
// Run with `cargo run --example sizing`.

use spwm::sizing::{battery_size, daily_energy, pv_size, DailyLoadProfile, DEFAULT_SUN_HOURS};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let appliances = [("Light", 300.0), ("Fan/TV", 700.0), ("Pump", 800.0)];
    for (name, wh) in appliances {
        println!("{name:<8} {wh:>6} Wh/day");
    }
    let profile = DailyLoadProfile::from_daily_energies(&appliances.map(|(_, wh)| wh))?;
    let daily = daily_energy(&profile);
    let pv = pv_size(daily, DEFAULT_SUN_HOURS)?;
    let battery = battery_size(daily, 12.0)?;

    println!("daily load   {daily:.1} Wh");
    println!("PV array     {pv:.2} W at {DEFAULT_SUN_HOURS} sun-hours");
    println!("battery bank {battery:.1} Ah at 12 V");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
