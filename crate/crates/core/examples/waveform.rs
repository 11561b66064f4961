// MSS, PCS and three-level output traces, exported as plotting CSV.
//
// Run with `cargo run --example waveform -- [out.csv]`. Without a path the
// first rows are printed.

use spwm::schedule::{build_schedule, ModulationSpec};
use spwm::waveform::render_all;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run(None)
}

fn run(out_path: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let schedule = build_schedule(&ModulationSpec::new(5, 50.0, 0.9, 12.0)?)?;
    let traces = render_all(&schedule, 100e3, 2)?;

    println!("samples per trace: {}", traces.output.len());
    println!("MSS duty: {:.4}", traces.mss.mean());
    println!("output mean: {:.6} V", traces.output.mean());
    println!(
        "output RMS: {:.4} V (schedule predicts {:.4} V)",
        traces.output.mean_square().sqrt(),
        12.0 * schedule.duty_fraction().sqrt()
    );

    let mut csv = Vec::new();
    traces.write_csv(&mut csv)?;
    match out_path {
        Some(path) => {
            std::fs::write(&path, &csv)?;
            println!("wrote {path}");
        }
        _ => {
            for line in String::from_utf8(csv)?.lines().take(6) {
                println!("{line}");
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(std::env::args().nth(1))
}
