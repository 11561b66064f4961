//! Direct sinusoidal PWM for a centre-tap, three-level inverter.
//!
//! Pulse widths come straight from a closed-form sine expression instead of
//! a sine/triangle comparison. The crate covers the whole chain:
//!
//! - [`schedule`]: pulse widths, switching angles and notch/pulse timing
//! - [`waveform`]: sampled MSS, PCS and three-level output traces
//! - [`spectrum`]: closed-form Fourier coefficients, THD, DFT cross-check
//! - [`powerflow`]: PV/battery/grid/DG health classification, routing and
//!   priority load switching
//! - [`sizing`]: PV array and battery bank sizing from a daily load profile
//! - [`hdlgen`]: tick quantization, VHDL state-machine generation and a
//!   cycle-accurate interpreter for the emitted design
//! - [`cli`]: the `spwm` command-line front end
//!
//! ```
//! use spwm::schedule::{build_schedule, ModulationSpec};
//! use spwm::spectrum::{fourier_coefficients, thd};
//!
//! let spec = ModulationSpec::new(3, 50.0, 1.0, 1.0).unwrap();
//! let schedule = build_schedule(&spec).unwrap();
//! assert!((schedule.total_ms() - 10.0).abs() < 1e-9);
//!
//! let spectrum = fourier_coefficients(&schedule, 50);
//! assert!(thd(&spectrum).unwrap() > 60.0);
//! ```

pub mod cli;
pub mod error;
pub mod hdlgen;
pub mod powerflow;
pub mod schedule;
pub mod sizing;
pub mod spectrum;
pub mod waveform;

pub use error::{Error, Result};
