// A day of PV / battery / grid / DG switching with a prioritized load set.
//
// Run with `cargo run --example powerflow`.

use spwm::powerflow::{
    classify, route, simulate, write_trace_csv, LoadItem, LogicLevels, Scenario, SourceRatings,
    SourceSnapshot, TimedSnapshot,
};

fn at(t: f64, pv: f64, battery: f64, grid: f64, dg: Option<f64>) -> TimedSnapshot {
    TimedSnapshot {
        t,
        snapshot: SourceSnapshot {
            pv_volts: pv,
            battery_volts: battery,
            grid_volts: grid,
            dg_available: dg.is_some(),
            dg_volts: dg.unwrap_or(0.0),
        },
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("pv grid dg bat -> battery      load");
    for levels in LogicLevels::all() {
        let d = route(levels);
        println!(
            " {}    {}   {}   {}  -> {:<12} {}",
            levels.pv as u8,
            levels.grid as u8,
            levels.dg as u8,
            levels.battery as u8,
            d.battery_mode.as_str(),
            d.load_source.as_str()
        );
    }

    let healthy = classify(&at(0.0, 12.4, 12.6, 221.0, None).snapshot);
    println!("\nmorning snapshot levels: {healthy:?}");

    let scenario = Scenario {
        ratings: SourceRatings {
            pv_w: 75.0,
            battery_w: 300.0,
            grid_w: 1100.0,
            dg_w: 750.0,
        },
        loads: vec![
            LoadItem::new("Light", 300.0, 1),
            LoadItem::new("Fan/TV", 700.0, 2),
            LoadItem::new("Pump", 800.0, 3),
        ],
        snapshots: vec![
            at(6.0, 11.0, 12.2, 225.0, None),
            at(9.0, 13.5, 12.9, 230.0, None),
            at(13.0, 14.0, 13.4, 180.0, None),
            at(19.0, 2.0, 11.0, 0.0, Some(220.0)),
            at(23.0, 0.0, 9.9, 0.0, None),
        ],
    };
    let trace = simulate(&scenario)?;
    let mut csv = Vec::new();
    write_trace_csv(&trace, &mut csv)?;
    println!("\n{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
