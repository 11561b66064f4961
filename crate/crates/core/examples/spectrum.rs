// Closed-form harmonics of the output, checked against a DFT of the
// sampled trace.
//
// Run with `cargo run --release --example spectrum`.

use spwm::schedule::{build_schedule, ModulationSpec};
use spwm::spectrum::{edge_quantization_bound, fourier_coefficients, spectrum_via_dft, thd};
use spwm::waveform::render_output;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModulationSpec::new(7, 50.0, 1.0, 1.0)?;
    let schedule = build_schedule(&spec)?;
    let closed = fourier_coefficients(&schedule, 50);
    let trace = render_output(&schedule, 1e6, 1)?;
    let dft = spectrum_via_dft(&trace, 50)?;

    println!("order      b_n closed       b_n dft");
    for n in (1..=19).step_by(2) {
        println!("{n:>5} {:>15.8} {:>13.8}", closed.b(n), dft.b(n));
    }
    println!("THD closed form: {:.4} %", thd(&closed)?);
    println!("THD from DFT:    {:.4} %", thd(&dft)?);

    let worst = (1..=50)
        .map(|n| (closed.b(n) - dft.b(n)).abs())
        .fold(0.0, f64::max);
    let bound = edge_quantization_bound(&spec, 1e6);
    println!("largest |Δb_n| {worst:.2e} V, edge quantization bound {bound:.2e} V");
    assert!(worst <= bound);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
