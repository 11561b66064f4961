// THD of the unfiltered output as the pulse count grows.
//
// Run with `cargo run --example thd_sweep`.

use spwm::schedule::ModulationSpec;
use spwm::spectrum::{thd_sweep, write_sweep_csv};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let template = ModulationSpec::new(1, 50.0, 1.0, 1.0)?;
    let ns: Vec<usize> = (3..=31).step_by(2).collect();
    let rows = thd_sweep(&ns, &template, 50)?;

    for (n, thd) in &rows {
        let bar = "#".repeat((thd / 2.0).round() as usize);
        println!("N={n:<3} {thd:>8.3} % {bar}");
    }
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));

    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv)?;
    println!("\n{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
