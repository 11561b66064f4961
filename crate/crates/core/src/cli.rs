//! `spwm` command-line front end.
//!
//! Every subcommand writes one artifact to `--output` (or stdout). Options can
//! also come from `--config <file.json>`, a JSON object whose keys are flag
//! names; flags given on the command line win over the file.
//!
//! Exit status: 0 on success, 1 when a computation fails (bad K,
//! undersampling, tick resolution, ...), 2 for usage errors including an
//! unwritable output path.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hdlgen::{emit_hdl, quantize, ClockSpec, DEFAULT_CLK_HZ};
use crate::powerflow::{simulate, write_trace_csv, Scenario};
use crate::schedule::{build_schedule, ModulationSpec};
use crate::sizing::{self, DailyLoadProfile, SizingFactors, SizingRequest, DEFAULT_SUN_HOURS};
use crate::spectrum::{
    fourier_coefficients, spectrum_via_dft, thd_sweep, write_sweep_csv, HarmonicSpectrum,
    DEFAULT_ORDER_MAX,
};
use crate::waveform::{render_all, TraceSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spwm", version, about = "Direct sinusoidal PWM toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pulse widths, switching angles and notch/pulse timing.
    Schedule {
        #[command(flatten)]
        modulation: ModulationArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sampled MSS, PCS and three-level output traces.
    Synth {
        #[command(flatten)]
        modulation: ModulationArgs,
        #[arg(long, default_value = "1e6", value_parser = parse_real)]
        sample_rate: f64,
        #[arg(long, default_value = "1", value_parser = parse_count)]
        cycles: usize,
        #[arg(long, value_enum, default_value_t = SignalArg::All)]
        signal: SignalArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Harmonic coefficients and THD of the output.
    Spectrum {
        #[command(flatten)]
        modulation: ModulationArgs,
        #[arg(long, default_value_t = DEFAULT_ORDER_MAX, value_parser = parse_count)]
        order_max: usize,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        /// Sampling rate of the trace analysed by `--method dft`.
        #[arg(long, default_value = "1e6", value_parser = parse_real)]
        sample_rate: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// THD against pulse count.
    Sweep {
        /// `start:stop[:step]`, a comma list, or a single value.
        #[arg(long = "n")]
        n_values: String,
        #[arg(long, default_value = "50", value_parser = parse_real)]
        freq: f64,
        #[arg(long, default_value = "1", value_parser = parse_real)]
        k: f64,
        #[arg(long, default_value = "1", value_parser = parse_real)]
        amplitude: f64,
        #[arg(long, default_value_t = DEFAULT_ORDER_MAX, value_parser = parse_count)]
        order_max: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the source controller over a JSON scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// PV array and battery sizing.
    Size {
        /// JSON request `{hourly_w[24], sun_hours, battery_volts}`.
        #[arg(long, conflicts_with_all = ["hourly", "appliance_wh"])]
        input: Option<PathBuf>,
        /// 24 comma-separated hourly loads in watts.
        #[arg(long, conflicts_with = "appliance_wh")]
        hourly: Option<String>,
        /// Comma-separated daily appliance energies in Wh, spread over the day.
        #[arg(long)]
        appliance_wh: Option<String>,
        #[arg(long, value_parser = parse_real)]
        sun_hours: Option<f64>,
        #[arg(long, value_parser = parse_real)]
        battery_volts: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// VHDL state machine for the schedule.
    Codegen {
        #[command(flatten)]
        modulation: ModulationArgs,
        #[arg(long, default_value_t = DEFAULT_CLK_HZ, value_parser = parse_real)]
        clk: f64,
        #[arg(long, default_value = "10", value_parser = parse_u32)]
        divider: u32,
        /// Entity name, `N<n>` by default.
        #[arg(long)]
        entity: Option<String>,
        /// Where to write the JSON sidecar. Defaults to the output path with
        /// a `.json` extension when `--output` is given.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ModulationArgs {
    /// Pulses per half cycle.
    #[arg(long = "n", default_value = "3", value_parser = parse_count)]
    pub n_pulses: usize,
    #[arg(long, default_value = "50", value_parser = parse_real)]
    pub freq: f64,
    /// Voltage regulating factor in [0, 1].
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub k: f64,
    /// DC rail magnitude in volts.
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub amplitude: f64,
}

impl ModulationArgs {
    fn spec(&self) -> Result<ModulationSpec> {
        ModulationSpec::new(self.n_pulses, self.freq, self.k, self.amplitude)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file of default option values keyed by flag name.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignalArg {
    All,
    Mss,
    Pcs,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Dft,
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    let v = parse_real(s)?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as usize)
}

fn parse_u32(s: &str) -> std::result::Result<u32, String> {
    parse_count(s).map(|v| v as u32)
}

/// `start:stop[:step]` (inclusive), `a,b,c`, or a single value.
pub fn parse_range(s: &str) -> std::result::Result<Vec<usize>, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (parse_count(a)?, parse_count(b)?, 1),
            [a, b, c] => (parse_count(a)?, parse_count(b)?, parse_count(c)?),
            _ => return Err(format!("`{s}` is not start:stop[:step]")),
        };
        if step == 0 {
            return Err("range step must be positive".into());
        }
        if stop < start {
            return Err(format!("range `{s}` is empty"));
        }
        Ok((start..=stop).step_by(step).collect())
    } else {
        s.split(',').map(parse_count).collect()
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

/// Failure of one invocation.
#[derive(Debug)]
enum RunError {
    Usage(String),
    Module(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Module(e)
    }
}

/// Splice `--config` values in front of the explicit arguments so that the
/// explicit ones override them.
fn expand_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let strings: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut config_path = None;
    for (i, a) in strings.iter().enumerate() {
        if a == "--config" {
            config_path = strings.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        }
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let Some(sub_index) = strings.iter().skip(1).position(|a| !a.starts_with('-')) else {
        return Ok(args);
    };
    let sub_index = sub_index + 1;

    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("invalid config {path}: {e}"))?;
    let object = value
        .as_object()
        .ok_or_else(|| format!("config {path} must be a JSON object"))?;

    let mut injected = Vec::new();
    for (key, value) in object {
        let flag = format!("--{}", key.replace('_', "-"));
        let rendered = match value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            _ => return Err(format!("config key {key} has an unsupported value")),
        };
        injected.push(OsString::from(flag));
        injected.push(OsString::from(rendered));
    }

    let mut out = args[..=sub_index].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub_index + 1..]);
    Ok(out)
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

fn write_artifact(
    path: Option<&Path>,
    bytes: &[u8],
    stdout: &mut dyn Write,
) -> std::result::Result<(), RunError> {
    match path {
        Some(p) => fs::write(p, bytes)
            .map_err(|e| RunError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(bytes)
            .map_err(|e| RunError::Module(Error::Io(e))),
    }
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    method: &'static str,
    order_max: usize,
    thd_percent: Option<f64>,
    #[serde(flatten)]
    spectrum: &'a HarmonicSpectrum,
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "N")]
    n: usize,
    thd_percent: f64,
}

fn execute(command: Command, stdout: &mut dyn Write) -> std::result::Result<(), RunError> {
    match command {
        Command::Schedule { modulation, out } => {
            let schedule = build_schedule(&modulation.spec()?)?;
            let bytes = match out.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut buf = Vec::new();
                    schedule.write_json(&mut buf)?;
                    buf.push(b'\n');
                    buf
                }
                Format::Csv => {
                    let mut buf = Vec::new();
                    schedule.write_csv(&mut buf)?;
                    buf
                }
                Format::Text => {
                    let mut s = format!(
                        "N={} f={} Hz K={} half period {} ms\n",
                        schedule.spec.n_pulses,
                        schedule.spec.frequency_hz,
                        schedule.spec.k_factor,
                        schedule.half_period_ms
                    );
                    for seg in schedule.segments() {
                        s.push_str(&format!(
                            "{:>4} {:<5} start {:>10.6} ms  width {:>10.6} ms  {:>9.4}° .. {:>9.4}°\n",
                            seg.segment_index,
                            seg.kind.as_str(),
                            seg.start_ms,
                            seg.duration_ms,
                            seg.start_deg,
                            seg.end_deg
                        ));
                    }
                    s.into_bytes()
                }
            };
            write_artifact(out.output.as_deref(), &bytes, stdout)
        }
        Command::Synth {
            modulation,
            sample_rate,
            cycles,
            signal,
            out,
        } => {
            let schedule = build_schedule(&modulation.spec()?)?;
            let set = render_all(&schedule, sample_rate, cycles)?;
            let pick = |set: &TraceSet| match signal {
                SignalArg::Mss => Some(set.mss.clone()),
                SignalArg::Pcs => Some(set.pcs.clone()),
                SignalArg::Output => Some(set.output.clone()),
                SignalArg::All => None,
            };
            let bytes = match (out.format.unwrap_or(Format::Json), pick(&set)) {
                (Format::Json, Some(trace)) => json_bytes(&trace)?,
                (Format::Json, None) => json_bytes(&set)?,
                (Format::Csv, Some(trace)) => {
                    let mut buf = Vec::new();
                    trace.write_csv(&mut buf)?;
                    buf
                }
                (Format::Csv, None) => {
                    let mut buf = Vec::new();
                    set.write_csv(&mut buf)?;
                    buf
                }
                (Format::Text, _) => format!(
                    "samples {}\nduration_ms {}\nmss_duty {}\noutput_mean {}\noutput_rms {}\n",
                    set.output.len(),
                    set.output.duration_ms,
                    set.mss.mean(),
                    set.output.mean(),
                    set.output.mean_square().sqrt()
                )
                .into_bytes(),
            };
            write_artifact(out.output.as_deref(), &bytes, stdout)
        }
        Command::Spectrum {
            modulation,
            order_max,
            method,
            sample_rate,
            out,
        } => {
            if order_max == 0 {
                return Err(RunError::Usage("--order-max must be at least 1".into()));
            }
            let schedule = build_schedule(&modulation.spec()?)?;
            let (spectrum, method_name) = match method {
                Method::Closed => (fourier_coefficients(&schedule, order_max), "closed"),
                Method::Dft => {
                    let trace = crate::waveform::render_output(&schedule, sample_rate, 1)?;
                    (spectrum_via_dft(&trace, order_max)?, "dft")
                }
            };
            let thd_percent = spectrum.thd_fraction.map(|f| 100.0 * f);
            let bytes = match out.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&SpectrumReport {
                    method: method_name,
                    order_max,
                    thd_percent,
                    spectrum: &spectrum,
                })?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    spectrum.write_csv(&mut buf)?;
                    buf
                }
                Format::Text => {
                    let thd = crate::spectrum::thd(&spectrum)?;
                    format!(
                        "fundamental {} V peak\nTHD {:.6} % (harmonics 2..{})\n",
                        spectrum.magnitude(1),
                        thd,
                        order_max
                    )
                    .into_bytes()
                }
            };
            write_artifact(out.output.as_deref(), &bytes, stdout)
        }
        Command::Sweep {
            n_values,
            freq,
            k,
            amplitude,
            order_max,
            out,
        } => {
            let ns = parse_range(&n_values).map_err(RunError::Usage)?;
            if order_max == 0 {
                return Err(RunError::Usage("--order-max must be at least 1".into()));
            }
            let template =
                ModulationSpec::new(ns.first().copied().unwrap_or(1).max(1), freq, k, amplitude)?;
            let rows = thd_sweep(&ns, &template, order_max)?;
            let bytes = match out.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(
                    &rows
                        .iter()
                        .map(|&(n, thd_percent)| SweepRow { n, thd_percent })
                        .collect::<Vec<_>>(),
                )?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_sweep_csv(&rows, &mut buf)?;
                    buf
                }
                Format::Text => rows
                    .iter()
                    .map(|(n, t)| format!("N={n:<4} THD {t:.6} %\n"))
                    .collect::<String>()
                    .into_bytes(),
            };
            write_artifact(out.output.as_deref(), &bytes, stdout)
        }
        Command::Simulate { scenario, out } => {
            let text = fs::read_to_string(&scenario).map_err(|e| {
                RunError::Usage(format!("cannot read scenario {}: {e}", scenario.display()))
            })?;
            let scenario: Scenario = serde_json::from_str(&text).map_err(Error::from)?;
            let records = simulate(&scenario)?;
            let bytes = match out.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&records)?,
                Format::Csv | Format::Text => {
                    let mut buf = Vec::new();
                    write_trace_csv(&records, &mut buf)?;
                    buf
                }
            };
            write_artifact(out.output.as_deref(), &bytes, stdout)
        }
        Command::Size {
            input,
            hourly,
            appliance_wh,
            sun_hours,
            battery_volts,
            out,
        } => {
            let mut request = if let Some(path) = input {
                let text = fs::read_to_string(&path)
                    .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<SizingRequest>(&text).map_err(Error::from)?
            } else {
                let profile = match (hourly, appliance_wh) {
                    (Some(h), _) => {
                        DailyLoadProfile::try_from(parse_list(&h).map_err(RunError::Usage)?)?
                    }
                    (None, Some(a)) => DailyLoadProfile::from_daily_energies(
                        &parse_list(&a).map_err(RunError::Usage)?,
                    )?,
                    (None, None) => {
                        return Err(RunError::Usage(
                            "size needs --input, --hourly or --appliance-wh".into(),
                        ))
                    }
                };
                let battery_volts = battery_volts
                    .ok_or_else(|| RunError::Usage("size needs --battery-volts".into()))?;
                SizingRequest {
                    hourly_w: profile,
                    sun_hours: DEFAULT_SUN_HOURS,
                    battery_volts,
                    factors: SizingFactors::default(),
                }
            };
            if let Some(h) = sun_hours {
                request.sun_hours = h;
            }
            if let Some(v) = battery_volts {
                request.battery_volts = v;
            }
            let result = sizing::size(&request)?;
            let bytes = match out.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&result)?,
                Format::Csv => format!(
                    "daily_wh,pv_watts,battery_ah\n{},{},{}\n",
                    result.daily_wh, result.pv_watts, result.battery_ah
                )
                .into_bytes(),
                Format::Text => format!(
                    "daily load {} Wh\nPV array {:.2} W ({} sun-hours)\nbattery {:.2} Ah at {} V\n",
                    result.daily_wh,
                    result.pv_watts,
                    request.sun_hours,
                    result.battery_ah,
                    request.battery_volts
                )
                .into_bytes(),
            };
            write_artifact(out.output.as_deref(), &bytes, stdout)
        }
        Command::Codegen {
            modulation,
            clk,
            divider,
            entity,
            sidecar,
            out,
        } => {
            let schedule = build_schedule(&modulation.spec()?)?;
            let clock = ClockSpec::new(clk, divider)?;
            let program = quantize(&schedule, &clock)?;
            let entity = entity.unwrap_or_else(|| format!("N{}", modulation.n_pulses));
            let sidecar_json = {
                let mut s = program.sidecar_json()?;
                s.push('\n');
                s
            };
            let format = out.format.unwrap_or(Format::Text);
            let primary = match format {
                Format::Json => sidecar_json.clone(),
                Format::Text => emit_hdl(&program, &entity)?,
                Format::Csv => {
                    return Err(RunError::Usage(
                        "codegen writes text (HDL) or json (state table)".into(),
                    ))
                }
            };
            write_artifact(out.output.as_deref(), primary.as_bytes(), stdout)?;
            let sidecar_path = sidecar.or_else(|| match format {
                Format::Text => out.output.as_ref().map(|p| p.with_extension("json")),
                _ => None,
            });
            if let Some(p) = sidecar_path {
                write_artifact(Some(&p), sidecar_json.as_bytes(), stdout)?;
            }
            Ok(())
        }
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };

    let command = Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true));
    let matches = match command.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return EXIT_USAGE;
        }
    };

    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(RunError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(RunError::Module(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}
