//! Sampled drive signals and the three-level output voltage.
//!
//! Sample `k` sits at `t = k / sample_rate_hz`. A sample falling exactly on
//! a segment boundary takes the value of the segment that starts there.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::PulseSchedule;

/// Minimum samples per pulse slot for a render to be accepted.
pub const MIN_SAMPLES_PER_SLOT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SignalKind {
    /// Main switching signal, 0/1.
    Mss,
    /// Polarity control signal, 0/1.
    Pcs,
    /// Inverter output, volts in {−V_dc, 0, +V_dc}.
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformTrace {
    pub sample_rate_hz: f64,
    pub fundamental_hz: f64,
    pub signal_kind: SignalKind,
    pub duration_ms: f64,
    pub samples: Vec<f64>,
}

impl WaveformTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_ms(&self, index: usize) -> f64 {
        index as f64 * 1000.0 / self.sample_rate_hz
    }

    /// Value of the sample at or immediately before `t_ms`.
    pub fn value_at_ms(&self, t_ms: f64) -> Option<f64> {
        let index = (t_ms * self.sample_rate_hz / 1000.0 + 1e-9).floor();
        if index < 0.0 {
            return None;
        }
        self.samples.get(index as usize).copied()
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    /// Number of fundamental periods covered.
    pub fn cycles(&self) -> f64 {
        self.samples.len() as f64 * self.fundamental_hz / self.sample_rate_hz
    }

    /// Indices `k` where `samples[k] != samples[k - 1]`.
    pub fn transitions(&self) -> Vec<usize> {
        self.samples
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// Two-column `time_ms,value` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["time_ms", "value"])?;
        for (k, v) in self.samples.iter().enumerate() {
            wtr.write_record([self.time_ms(k).to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// MSS, PCS and output traces rendered on a common time base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub mss: WaveformTrace,
    pub pcs: WaveformTrace,
    pub output: WaveformTrace,
}

impl TraceSet {
    /// Multi-column `time_ms,mss,pcs,output` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["time_ms", "mss", "pcs", "output"])?;
        for k in 0..self.mss.len() {
            wtr.write_record([
                self.mss.time_ms(k).to_string(),
                self.mss.samples[k].to_string(),
                self.pcs.samples[k].to_string(),
                self.output.samples[k].to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn minimum_sample_rate(n_pulses: usize, frequency_hz: f64) -> f64 {
    MIN_SAMPLES_PER_SLOT * n_pulses as f64 * frequency_hz
}

fn check_rate(sample_rate_hz: f64, minimum: f64) -> Result<()> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz >= minimum) {
        return Err(Error::Undersampled {
            requested: sample_rate_hz,
            minimum,
        });
    }
    Ok(())
}

fn check_cycles(n_cycles: usize) -> Result<()> {
    if n_cycles == 0 {
        return Err(Error::Domain("n_cycles must be at least 1".into()));
    }
    Ok(())
}

fn sample_count(sample_rate_hz: f64, duration_ms: f64) -> usize {
    (sample_rate_hz * duration_ms / 1000.0).round() as usize
}

/// Maps sample indices to (half-cycle parity, offset within the half cycle).
///
/// When a half period holds an integer number of samples the mapping is done
/// in integer arithmetic so that sample `k` and `k + H` see identical offsets.
struct HalfCycleClock {
    sample_rate_hz: f64,
    half_period_ms: f64,
    samples_per_half: Option<u64>,
}

impl HalfCycleClock {
    fn new(sample_rate_hz: f64, frequency_hz: f64) -> Self {
        let per_half = sample_rate_hz / (2.0 * frequency_hz);
        let rounded = per_half.round();
        let samples_per_half = ((per_half - rounded).abs() < 1e-9 * per_half.max(1.0)
            && rounded >= 1.0)
            .then_some(rounded as u64);
        Self {
            sample_rate_hz,
            half_period_ms: 1000.0 / (2.0 * frequency_hz),
            samples_per_half,
        }
    }

    /// `(is_second_half, offset_ms)` for sample `k`.
    fn locate(&self, k: u64) -> (bool, f64) {
        match self.samples_per_half {
            Some(h) => {
                let second = (k / h) % 2 == 1;
                let offset = (k % h) as f64 * 1000.0 / self.sample_rate_hz;
                (second, offset)
            }
            None => {
                let t_ms = k as f64 * 1000.0 / self.sample_rate_hz;
                let halves = (t_ms / self.half_period_ms).floor();
                let offset = (t_ms - halves * self.half_period_ms).max(0.0);
                (halves as u64 % 2 == 1, offset)
            }
        }
    }
}

/// MSS level (0/1) at every sample, as a closure over the schedule boundaries.
fn mss_levels(
    schedule: &PulseSchedule,
    sample_rate_hz: f64,
    n_cycles: usize,
) -> Result<(Vec<(bool, u8)>, f64)> {
    check_cycles(n_cycles)?;
    let spec = &schedule.spec;
    check_rate(
        sample_rate_hz,
        minimum_sample_rate(spec.n_pulses, spec.frequency_hz),
    )?;
    let duration_ms = n_cycles as f64 * 1000.0 / spec.frequency_hz;
    let count = sample_count(sample_rate_hz, duration_ms);
    let clock = HalfCycleClock::new(sample_rate_hz, spec.frequency_hz);
    let edges = schedule.boundaries_ms();

    let levels = (0..count as u64)
        .map(|k| {
            let (second, offset) = clock.locate(k);
            // Number of boundaries at or before `offset`, excluding the leading 0.
            let crossed = edges[1..edges.len() - 1].partition_point(|e| *e <= offset);
            (second, (crossed % 2) as u8)
        })
        .collect();
    Ok((levels, duration_ms))
}

pub fn render_mss(
    schedule: &PulseSchedule,
    sample_rate_hz: f64,
    n_cycles: usize,
) -> Result<WaveformTrace> {
    let (levels, duration_ms) = mss_levels(schedule, sample_rate_hz, n_cycles)?;
    Ok(WaveformTrace {
        sample_rate_hz,
        fundamental_hz: schedule.spec.frequency_hz,
        signal_kind: SignalKind::Mss,
        duration_ms,
        samples: levels.into_iter().map(|(_, l)| l as f64).collect(),
    })
}

/// Square wave at the fundamental: 1 for the first half cycle, 0 for the second.
pub fn render_pcs(
    frequency_hz: f64,
    sample_rate_hz: f64,
    n_cycles: usize,
) -> Result<WaveformTrace> {
    check_cycles(n_cycles)?;
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(Error::Domain(format!(
            "frequency_hz must be positive, got {frequency_hz}"
        )));
    }
    // One sample per half cycle is not enough to tell the halves apart.
    check_rate(sample_rate_hz, MIN_SAMPLES_PER_SLOT * frequency_hz)?;
    let duration_ms = n_cycles as f64 * 1000.0 / frequency_hz;
    let count = sample_count(sample_rate_hz, duration_ms);
    let clock = HalfCycleClock::new(sample_rate_hz, frequency_hz);
    let samples = (0..count as u64)
        .map(|k| if clock.locate(k).0 { 0.0 } else { 1.0 })
        .collect();
    Ok(WaveformTrace {
        sample_rate_hz,
        fundamental_hz: frequency_hz,
        signal_kind: SignalKind::Pcs,
        duration_ms,
        samples,
    })
}

/// Three-level output: `amplitude · MSS · (+1 if PCS else −1)`.
pub fn render_output(
    schedule: &PulseSchedule,
    sample_rate_hz: f64,
    n_cycles: usize,
) -> Result<WaveformTrace> {
    let (levels, duration_ms) = mss_levels(schedule, sample_rate_hz, n_cycles)?;
    let v = schedule.spec.amplitude;
    let samples = levels
        .into_iter()
        .map(|(second, level)| match (level, second) {
            (0, _) => 0.0,
            (_, false) => v,
            (_, true) => -v,
        })
        .collect();
    Ok(WaveformTrace {
        sample_rate_hz,
        fundamental_hz: schedule.spec.frequency_hz,
        signal_kind: SignalKind::Output,
        duration_ms,
        samples,
    })
}

pub fn render_all(
    schedule: &PulseSchedule,
    sample_rate_hz: f64,
    n_cycles: usize,
) -> Result<TraceSet> {
    Ok(TraceSet {
        mss: render_mss(schedule, sample_rate_hz, n_cycles)?,
        pcs: render_pcs(schedule.spec.frequency_hz, sample_rate_hz, n_cycles)?,
        output: render_output(schedule, sample_rate_hz, n_cycles)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{build_schedule, ModulationSpec};

    fn schedule(n: usize, f: f64, k: f64, v: f64) -> PulseSchedule {
        build_schedule(&ModulationSpec::new(n, f, k, v).unwrap()).unwrap()
    }

    #[test]
    fn mss_n3_duty_and_length() {
        let s = schedule(3, 50.0, 1.0, 1.0);
        let mss = render_mss(&s, 1e6, 1).unwrap();
        assert_eq!(mss.len(), 20_000);
        let high: f64 = mss.samples.iter().sum();
        // Edges at multiples of 833.33 µs miss the 1 µs grid by at most one sample each.
        assert!((high / 20_000.0 - 2.0 / 3.0).abs() < 12.0 / 20_000.0);
        assert_eq!(mss.value_at_ms(0.4), Some(0.0));
        assert_eq!(mss.value_at_ms(1.0), Some(1.0));
    }

    #[test]
    fn mss_zero_depth_is_flat() {
        let s = schedule(5, 50.0, 0.0, 1.0);
        let mss = render_mss(&s, 1e6, 1).unwrap();
        assert!(mss.samples.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn undersampling_is_rejected() {
        let s = schedule(3, 50.0, 1.0, 1.0);
        match render_mss(&s, 14_000.0, 1) {
            Err(Error::Undersampled { minimum, .. }) => assert_eq!(minimum, 15_000.0),
            other => panic!("expected undersampling error, got {other:?}"),
        }
        assert!(render_output(&s, 15_000.0, 1).is_ok());
    }

    #[test]
    fn pcs_halves() {
        let pcs = render_pcs(50.0, 1e6, 1).unwrap();
        assert_eq!(pcs.len(), 20_000);
        assert!(pcs.samples[..10_000].iter().all(|v| *v == 1.0));
        assert!(pcs.samples[10_000..].iter().all(|v| *v == 0.0));
        assert_eq!(pcs.value_at_ms(5.0), Some(1.0));
        assert_eq!(pcs.value_at_ms(15.0), Some(0.0));
        assert_eq!(render_pcs(60.0, 1e6, 3).unwrap().len(), 50_000);
    }

    #[test]
    fn output_levels_and_antisymmetry() {
        let s = schedule(3, 50.0, 1.0, 12.0);
        let out = render_output(&s, 1e6, 2).unwrap();
        assert_eq!(out.value_at_ms(1.0), Some(12.0));
        assert_eq!(out.value_at_ms(11.0), Some(-12.0));
        assert!(out
            .samples
            .iter()
            .all(|v| *v == 0.0 || *v == 12.0 || *v == -12.0));
        let h = 10_000;
        for k in 0..out.len() - h {
            assert_eq!(out.samples[k + h], -out.samples[k]);
        }
        assert!(out.mean().abs() <= 12.0 / out.len() as f64);
    }

    #[test]
    fn output_rms_matches_duty() {
        let s = schedule(7, 50.0, 0.9, 1.0);
        let out = render_output(&s, 1e6, 1).unwrap();
        let rel = (out.mean_square() - s.duty_fraction()).abs() / s.duty_fraction();
        assert!(rel < 1e-3, "relative RMS² error {rel}");
    }

    #[test]
    fn non_integer_half_period_still_renders() {
        // 60 Hz at 1 MHz: 8333.33 samples per half cycle.
        let s = schedule(3, 60.0, 1.0, 1.0);
        let out = render_output(&s, 1e6, 3).unwrap();
        assert_eq!(out.len(), 50_000);
        assert_eq!(out.value_at_ms(1.0), Some(1.0));
        assert_eq!(out.value_at_ms(1000.0 / 120.0 + 1.0), Some(-1.0));
    }

    #[test]
    fn transitions_only_at_schedule_boundaries() {
        let s = schedule(5, 50.0, 1.0, 1.0);
        let mss = render_mss(&s, 1e6, 1).unwrap();
        let edges = s.boundaries_ms();
        for k in mss.transitions() {
            let t = mss.time_ms(k) % s.half_period_ms;
            let near = edges.iter().any(|e| (t - e).abs() <= 1e-3 + 1e-9);
            assert!(near, "transition at {t} ms is not next to a boundary");
        }
    }

    #[test]
    fn multi_column_csv() {
        let s = schedule(3, 50.0, 1.0, 1.0);
        let set = render_all(&s, 15_000.0, 1).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time_ms,mss,pcs,output\n"));
        assert_eq!(text.lines().count(), 301);
    }
}
