// Quantize a schedule to FPGA ticks, emit VHDL, read it back and simulate
// the design clock by clock.
//
// Run with `cargo run --release --example codegen -- [out.vhd]`.

use spwm::hdlgen::{emit_hdl, interpret, parse_hdl, quantize, ClockSpec};
use spwm::schedule::{build_schedule, ModulationSpec};
use spwm::spectrum::{fourier_coefficients, spectrum_via_dft, thd};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run(None)
}

fn run(out_path: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let schedule = build_schedule(&ModulationSpec::new(3, 50.0, 1.0, 1.0)?)?;
    let clock = ClockSpec::new(50e6, 10)?;
    let program = quantize(&schedule, &clock)?;
    for s in &program.states {
        println!("{:<3} PWM={} TM={}", s.name, s.level, s.ticks);
    }
    println!(
        "SEL toggles every {} clocks",
        program.polarity_half_period_clocks
    );

    let vhdl = emit_hdl(&program, "N3")?;
    match out_path {
        Some(path) => {
            std::fs::write(&path, &vhdl)?;
            std::fs::write(
                std::path::Path::new(&path).with_extension("json"),
                program.sidecar_json()?,
            )?;
            println!("wrote {path}");
        }
        _ => println!("{} lines of VHDL", vhdl.lines().count()),
    }

    let reparsed = parse_hdl(&vhdl)?;
    assert_eq!(reparsed, program);

    let run = interpret(&reparsed, 2 * reparsed.polarity_half_period_clocks)?;
    let simulated = thd(&spectrum_via_dft(&run.output(1.0), 50)?)?;
    let ideal = thd(&fourier_coefficients(&schedule, 50))?;
    println!("THD ideal {ideal:.4} %, simulated design {simulated:.4} %");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(std::env::args().nth(1))
}
