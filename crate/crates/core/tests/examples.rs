macro_rules! example {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(schedule_example, "schedule.rs");
example!(waveform_example, "waveform.rs");
example!(spectrum_example, "spectrum.rs");
example!(thd_sweep_example, "thd_sweep.rs");
example!(powerflow_example, "powerflow.rs");
example!(sizing_example, "sizing.rs");
example!(codegen_example, "codegen.rs");

#[test]
fn schedule_example_runs() {
    schedule_example::run_example().expect("schedule example should run");
}

#[test]
fn waveform_example_runs() {
    waveform_example::run_example().expect("waveform example should run");
}

#[test]
fn spectrum_example_runs() {
    spectrum_example::run_example().expect("spectrum example should run");
}

#[test]
fn thd_sweep_example_runs() {
    thd_sweep_example::run_example().expect("sweep example should run");
}

#[test]
fn powerflow_example_runs() {
    powerflow_example::run_example().expect("powerflow example should run");
}

#[test]
fn sizing_example_runs() {
    sizing_example::run_example().expect("sizing example should run");
}

#[test]
fn codegen_example_runs() {
    codegen_example::run_example().expect("codegen example should run");
}
