//! Harmonic content of the three-level output.
//!
//! Coefficients follow the usual real Fourier series over one fundamental
//! period `T`:
//!
//! ```text
//! a_n = (2/T) ∫ v(t) cos(n ω t) dt     b_n = (2/T) ∫ v(t) sin(n ω t) dt
//! ```
//!
//! THD = sqrt(Σ_{n=2..order_max} (a_n² + b_n²)) / sqrt(a_1² + b_1²).
//! The truncation order is part of every result; 50 is the default.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{build_schedule, ModulationSpec, PulseSchedule};
use crate::waveform::WaveformTrace;

pub const DEFAULT_ORDER_MAX: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum {
    pub fundamental_hz: f64,
    pub order_max: usize,
    /// Cosine coefficients, `a_coeffs[n - 1]` is `a_n`.
    pub a_coeffs: Vec<f64>,
    /// Sine coefficients, `b_coeffs[n - 1]` is `b_n`.
    pub b_coeffs: Vec<f64>,
    /// `None` when the fundamental vanishes.
    pub thd_fraction: Option<f64>,
}

impl HarmonicSpectrum {
    fn from_coeffs(fundamental_hz: f64, a_coeffs: Vec<f64>, b_coeffs: Vec<f64>) -> Self {
        let order_max = a_coeffs.len();
        let thd_fraction = thd_fraction(&a_coeffs, &b_coeffs);
        Self {
            fundamental_hz,
            order_max,
            a_coeffs,
            b_coeffs,
            thd_fraction,
        }
    }

    pub fn a(&self, order: usize) -> f64 {
        self.a_coeffs[order - 1]
    }

    pub fn b(&self, order: usize) -> f64 {
        self.b_coeffs[order - 1]
    }

    /// Peak amplitude of harmonic `order`.
    pub fn magnitude(&self, order: usize) -> f64 {
        self.a(order).hypot(self.b(order))
    }

    /// Mean-square value carried by harmonics `1..=order_max`.
    pub fn power(&self) -> f64 {
        self.a_coeffs
            .iter()
            .zip(&self.b_coeffs)
            .map(|(a, b)| (a * a + b * b) / 2.0)
            .sum()
    }

    /// `order,a_n,b_n,magnitude` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["order", "a_n", "b_n", "magnitude"])?;
        for n in 1..=self.order_max {
            wtr.write_record([
                n.to_string(),
                self.a(n).to_string(),
                self.b(n).to_string(),
                self.magnitude(n).to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn thd_fraction(a: &[f64], b: &[f64]) -> Option<f64> {
    let fundamental = a[0].hypot(b[0]);
    if fundamental == 0.0 || !fundamental.is_finite() {
        return None;
    }
    let harmonics: f64 = a[1..].iter().zip(&b[1..]).map(|(a, b)| a * a + b * b).sum();
    Some(harmonics.sqrt() / fundamental)
}

/// Closed-form coefficients of the scheduled output.
///
/// Each constant segment `[α, β)` at level `v` contributes
/// `v/(nπ)·(cos nα − cos nβ)` to `b_n` and `v/(nπ)·(sin nβ − sin nα)` to
/// `a_n`. Both half cycles are summed explicitly, so the vanishing of `a_n`
/// and of even `b_n` is a computed result, not an assumption.
pub fn fourier_coefficients(schedule: &PulseSchedule, order_max: usize) -> HarmonicSpectrum {
    let order_max = order_max.max(1);
    let v = schedule.spec.amplitude;
    let pulses: Vec<(f64, f64, f64)> = schedule
        .angles
        .pulses()
        .flat_map(|(rise, fall)| {
            let (rise, fall) = (rise.to_radians(), fall.to_radians());
            [(rise, fall, v), (rise + PI, fall + PI, -v)]
        })
        .collect();

    let mut a_coeffs = Vec::with_capacity(order_max);
    let mut b_coeffs = Vec::with_capacity(order_max);
    for n in 1..=order_max {
        let nf = n as f64;
        let (mut a, mut b) = (0.0, 0.0);
        for &(start, end, level) in &pulses {
            let (s0, c0) = (nf * start).sin_cos();
            let (s1, c1) = (nf * end).sin_cos();
            a += level * (s1 - s0);
            b += level * (c0 - c1);
        }
        a_coeffs.push(a / (nf * PI));
        b_coeffs.push(b / (nf * PI));
    }
    HarmonicSpectrum::from_coeffs(schedule.spec.frequency_hz, a_coeffs, b_coeffs)
}

/// THD in percent.
pub fn thd(spectrum: &HarmonicSpectrum) -> Result<f64> {
    spectrum
        .thd_fraction
        .map(|f| 100.0 * f)
        .ok_or(Error::UndefinedThd)
}

/// THD for each `N` in `n_values`, in the given order, with the rest of
/// `template` held fixed.
pub fn thd_sweep(
    n_values: &[usize],
    template: &ModulationSpec,
    order_max: usize,
) -> Result<Vec<(usize, f64)>> {
    n_values
        .par_iter()
        .map(|&n| {
            let spec = ModulationSpec {
                n_pulses: n,
                ..*template
            };
            let schedule = build_schedule(&spec)?;
            Ok((n, thd(&fourier_coefficients(&schedule, order_max))?))
        })
        .collect()
}

/// `N,thd_percent` CSV.
pub fn write_sweep_csv<W: Write>(rows: &[(usize, f64)], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["N", "thd_percent"])?;
    for (n, thd) in rows {
        wtr.write_record([n.to_string(), thd.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Discrete Fourier analysis of a sampled trace, read at multiples of the
/// trace's fundamental.
///
/// The trace must span a whole number of periods so that every harmonic
/// lands on an exact DFT bin.
pub fn spectrum_via_dft(trace: &WaveformTrace, order_max: usize) -> Result<HarmonicSpectrum> {
    let order_max = order_max.max(1);
    let len = trace.samples.len();
    let cycles = trace.cycles();
    let whole = cycles.round();
    if len == 0 || whole < 1.0 || (cycles - whole).abs() > 1e-6 {
        return Err(Error::NonIntegerPeriods { cycles });
    }
    let whole = whole as u64;
    let len_u = len as u64;

    // cos/sin of 2πj/len for every j; bins are looked up modulo len.
    let (cos_table, sin_table): (Vec<f64>, Vec<f64>) = (0..len)
        .map(|j| {
            let (s, c) = (2.0 * PI * j as f64 / len as f64).sin_cos();
            (c, s)
        })
        .unzip();

    let scale = 2.0 / len as f64;
    let (a_coeffs, b_coeffs): (Vec<f64>, Vec<f64>) = (1..=order_max as u64)
        .into_par_iter()
        .map(|n| {
            let bin = (n * whole) % len_u;
            let (mut a, mut b) = (0.0, 0.0);
            let mut phase = 0u64;
            for &x in &trace.samples {
                if x != 0.0 {
                    a += x * cos_table[phase as usize];
                    b += x * sin_table[phase as usize];
                }
                phase += bin;
                if phase >= len_u {
                    phase -= len_u;
                }
            }
            (a * scale, b * scale)
        })
        .unzip();
    Ok(HarmonicSpectrum::from_coeffs(
        trace.fundamental_hz,
        a_coeffs,
        b_coeffs,
    ))
}

/// Bound on `|Δa_n|, |Δb_n|` between the closed form and the DFT of a trace
/// whose edges are displaced by at most one sample: each of the `4N` edges
/// per period shifts at most `V·Δt` of area, weighted by `2/T`.
pub fn edge_quantization_bound(spec: &ModulationSpec, sample_rate_hz: f64) -> f64 {
    let edges = 4.0 * spec.n_pulses as f64;
    edges * 2.0 * spec.amplitude * spec.frequency_hz / sample_rate_hz
}
