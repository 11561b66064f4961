//! Pulse widths, switching angles and notch/pulse timing for one half cycle.
//!
//! The half cycle (180°) is split into `N` equal slots of `180/N` degrees.
//! Pulse `i` (1-based) sits at the centre of slot `i` and is
//! `K · (180/N) · sin((2i − 1)·π/(2N))` degrees wide, so widths follow a sine
//! envelope and the pattern is symmetric about 90°. Everything before the
//! first pulse, between pulses and after the last one is a notch (zero
//! output), giving `N + 1` notches and `N` pulses per half cycle.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the direct modulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    /// Pulses per half cycle (N).
    pub n_pulses: usize,
    /// Output fundamental in Hz.
    pub frequency_hz: f64,
    /// Voltage regulating factor K in [0, 1], scales every pulse width.
    pub k_factor: f64,
    /// DC rail magnitude V_dc in volts.
    pub amplitude: f64,
}

impl ModulationSpec {
    pub fn new(n_pulses: usize, frequency_hz: f64, k_factor: f64, amplitude: f64) -> Result<Self> {
        let spec = Self {
            n_pulses,
            frequency_hz,
            k_factor,
            amplitude,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return Err(Error::InvalidSpec("n_pulses must be at least 1".into()));
        }
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "frequency_hz must be positive, got {}",
                self.frequency_hz
            )));
        }
        // K > 1 would make neighbouring pulses overlap; rejected rather than clamped.
        if !(0.0..=1.0).contains(&self.k_factor) {
            return Err(Error::InvalidSpec(format!(
                "k_factor must lie in [0, 1], got {}",
                self.k_factor
            )));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// Width of one slot in degrees (180/N).
    pub fn slot_deg(&self) -> f64 {
        180.0 / self.n_pulses as f64
    }

    pub fn half_period_ms(&self) -> f64 {
        1000.0 / (2.0 * self.frequency_hz)
    }
}

/// Width of pulse `index` (1-based) in degrees.
pub fn pulse_width_deg(index: usize, spec: &ModulationSpec) -> Result<f64> {
    let n = spec.n_pulses;
    if index == 0 || index > n {
        return Err(Error::PulseIndex { index, n_pulses: n });
    }
    let n = n as f64;
    let phase = (2 * index - 1) as f64 * PI / (2.0 * n);
    Ok(spec.k_factor * (180.0 / n) * phase.sin())
}

/// Rising and falling edge angles of every pulse in the positive half cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingAngles {
    pub rising_deg: Vec<f64>,
    pub falling_deg: Vec<f64>,
}

impl SwitchingAngles {
    pub fn len(&self) -> usize {
        self.rising_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rising_deg.is_empty()
    }

    /// `(rising, falling)` pairs in pulse order.
    pub fn pulses(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rising_deg
            .iter()
            .copied()
            .zip(self.falling_deg.iter().copied())
    }
}

pub fn switching_angles(spec: &ModulationSpec) -> Result<SwitchingAngles> {
    spec.validate()?;
    let slot = spec.slot_deg();
    let mut rising_deg = Vec::with_capacity(spec.n_pulses);
    let mut falling_deg = Vec::with_capacity(spec.n_pulses);
    for i in 1..=spec.n_pulses {
        let centre = (2 * i - 1) as f64 * slot / 2.0;
        let half_width = pulse_width_deg(i, spec)? / 2.0;
        rising_deg.push(centre - half_width);
        falling_deg.push(centre + half_width);
    }
    Ok(SwitchingAngles {
        rising_deg,
        falling_deg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Notch,
    Pulse,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Notch => "notch",
            SegmentKind::Pulse => "pulse",
        }
    }

    /// MSS level during the segment.
    pub fn level(self) -> u8 {
        match self {
            SegmentKind::Notch => 0,
            SegmentKind::Pulse => 1,
        }
    }
}

/// One row of the exported segment table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub segment_index: usize,
    pub kind: SegmentKind,
    pub start_ms: f64,
    pub duration_ms: f64,
    pub start_deg: f64,
    pub end_deg: f64,
}

/// Timing of one half cycle: `T1, P1, T2, P2, ..., PN, T(N+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub spec: ModulationSpec,
    pub angles: SwitchingAngles,
    pub notch_ms: Vec<f64>,
    pub pulse_ms: Vec<f64>,
    pub half_period_ms: f64,
}

pub fn build_schedule(spec: &ModulationSpec) -> Result<PulseSchedule> {
    let angles = switching_angles(spec)?;
    let half_period_ms = spec.half_period_ms();
    let to_ms = half_period_ms / 180.0;
    let n = angles.len();

    let mut notch_ms = Vec::with_capacity(n + 1);
    notch_ms.push(angles.rising_deg[0] * to_ms);
    for i in 1..n {
        notch_ms.push((angles.rising_deg[i] - angles.falling_deg[i - 1]) * to_ms);
    }
    notch_ms.push((180.0 - angles.falling_deg[n - 1]) * to_ms);

    let pulse_ms = angles
        .pulses()
        .map(|(rise, fall)| (fall - rise) * to_ms)
        .collect();

    Ok(PulseSchedule {
        spec: *spec,
        angles,
        notch_ms,
        pulse_ms,
        half_period_ms,
    })
}

impl PulseSchedule {
    pub fn n_pulses(&self) -> usize {
        self.pulse_ms.len()
    }

    pub fn total_ms(&self) -> f64 {
        self.notch_ms.iter().sum::<f64>() + self.pulse_ms.iter().sum::<f64>()
    }

    pub fn total_pulse_ms(&self) -> f64 {
        self.pulse_ms.iter().sum()
    }

    /// Fraction of the half cycle spent in pulses.
    pub fn duty_fraction(&self) -> f64 {
        self.total_pulse_ms() / self.half_period_ms
    }

    /// Segment boundaries in degrees: `0, r1, f1, ..., rN, fN, 180`.
    pub fn boundaries_deg(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(2 * self.n_pulses() + 2);
        edges.push(0.0);
        for (rise, fall) in self.angles.pulses() {
            edges.push(rise);
            edges.push(fall);
        }
        edges.push(180.0);
        edges
    }

    /// Segment boundaries in milliseconds from the start of the half cycle.
    pub fn boundaries_ms(&self) -> Vec<f64> {
        let to_ms = self.half_period_ms / 180.0;
        self.boundaries_deg()
            .into_iter()
            .map(|d| d * to_ms)
            .collect()
    }

    /// Interleaved segments in time order.
    pub fn segments(&self) -> Vec<Segment> {
        let to_ms = self.half_period_ms / 180.0;
        let edges = self.boundaries_deg();
        let durations = self.durations_ms();
        edges
            .windows(2)
            .zip(durations)
            .enumerate()
            .map(|(index, (w, duration_ms))| Segment {
                segment_index: index,
                kind: if index % 2 == 0 {
                    SegmentKind::Notch
                } else {
                    SegmentKind::Pulse
                },
                start_ms: w[0] * to_ms,
                duration_ms,
                start_deg: w[0],
                end_deg: w[1],
            })
            .collect()
    }

    /// Durations in segment order `T1, P1, ..., PN, T(N+1)`.
    pub fn durations_ms(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.n_pulses() + 1);
        for (notch, pulse) in self.notch_ms.iter().zip(&self.pulse_ms) {
            out.push(*notch);
            out.push(*pulse);
        }
        out.push(self.notch_ms[self.n_pulses()]);
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for segment in self.segments() {
            wtr.serialize(segment)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Export<'a> {
            #[serde(flatten)]
            schedule: &'a PulseSchedule,
            segments: Vec<Segment>,
        }
        serde_json::to_writer_pretty(
            writer,
            &Export {
                schedule: self,
                segments: self.segments(),
            },
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, f: f64, k: f64) -> ModulationSpec {
        ModulationSpec::new(n, f, k, 1.0).unwrap()
    }

    /// Rise/fall written as slot-relative offsets, the other algebraic route
    /// to the same edges: slot start + half slot ∓ half width.
    fn oracle_edges(n: usize, k: f64) -> Vec<(f64, f64)> {
        let nf = n as f64;
        (1..=n)
            .map(|i| {
                let slot_start = (i - 1) as f64 * 180.0 / nf;
                let offset = k * 90.0 / nf * (((2 * i - 1) as f64) * PI / (2.0 * nf)).sin();
                (
                    slot_start + 90.0 / nf - offset,
                    slot_start + 90.0 / nf + offset,
                )
            })
            .collect()
    }

    #[test]
    fn pulse_widths_n3() {
        let s = spec(3, 50.0, 1.0);
        assert!((pulse_width_deg(1, &s).unwrap() - 30.0).abs() < 1e-12);
        assert!((pulse_width_deg(2, &s).unwrap() - 60.0).abs() < 1e-12);
        assert!((pulse_width_deg(3, &s).unwrap() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn zero_k_gives_zero_width() {
        let s = spec(7, 50.0, 0.0);
        for i in 1..=7 {
            assert_eq!(pulse_width_deg(i, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn pulse_index_out_of_range() {
        let s = spec(3, 50.0, 1.0);
        assert!(matches!(
            pulse_width_deg(0, &s),
            Err(Error::PulseIndex { index: 0, .. })
        ));
        assert!(matches!(
            pulse_width_deg(4, &s),
            Err(Error::PulseIndex { index: 4, .. })
        ));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ModulationSpec::new(0, 50.0, 1.0, 1.0).is_err());
        assert!(ModulationSpec::new(3, 0.0, 1.0, 1.0).is_err());
        assert!(ModulationSpec::new(3, 50.0, 1.01, 1.0).is_err());
        assert!(ModulationSpec::new(3, 50.0, -0.1, 1.0).is_err());
        assert!(ModulationSpec::new(3, 50.0, 1.0, 0.0).is_err());
        assert!(ModulationSpec::new(3, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn angles_n3_full_depth() {
        let a = switching_angles(&spec(3, 50.0, 1.0)).unwrap();
        for (got, want) in a.rising_deg.iter().zip([15.0, 60.0, 135.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        for (got, want) in a.falling_deg.iter().zip([45.0, 120.0, 165.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn angles_n3_half_depth() {
        let a = switching_angles(&spec(3, 50.0, 0.5)).unwrap();
        let oracle = oracle_edges(3, 0.5);
        for (i, (rise, fall)) in a.pulses().enumerate() {
            assert!((rise - oracle[i].0).abs() < 1e-12);
            assert!((fall - oracle[i].1).abs() < 1e-12);
        }
        for (got, want) in a.rising_deg.iter().zip([22.5, 75.0, 142.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in a.falling_deg.iter().zip([37.5, 105.0, 157.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn single_pulse_fills_half_cycle() {
        let a = switching_angles(&spec(1, 50.0, 1.0)).unwrap();
        assert!(a.rising_deg[0].abs() < 1e-12);
        assert!((a.falling_deg[0] - 180.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_n3_50hz() {
        let s = build_schedule(&spec(3, 50.0, 1.0)).unwrap();
        let tenth = 10.0 / 12.0;
        for t in &s.notch_ms {
            assert!((t - tenth).abs() < 1e-12);
        }
        let want = [2.0 * tenth, 4.0 * tenth, 2.0 * tenth];
        for (p, w) in s.pulse_ms.iter().zip(want) {
            assert!((p - w).abs() < 1e-12);
        }
        assert!((s.total_ms() - 10.0).abs() < 1e-12);
        assert_eq!(s.segments().len(), 7);
    }

    #[test]
    fn schedule_60hz_total() {
        let s = build_schedule(&spec(5, 60.0, 1.0)).unwrap();
        assert!((s.total_ms() - 1000.0 / 120.0).abs() < 1e-9);
    }

    #[test]
    fn segments_are_contiguous() {
        let s = build_schedule(&spec(9, 50.0, 0.8)).unwrap();
        let segs = s.segments();
        for w in segs.windows(2) {
            assert!((w[0].start_ms + w[0].duration_ms - w[1].start_ms).abs() < 1e-12);
            assert_eq!(w[0].end_deg, w[1].start_deg);
        }
        assert_eq!(segs[0].kind, SegmentKind::Notch);
        assert_eq!(segs.last().unwrap().end_deg, 180.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = build_schedule(&spec(3, 50.0, 1.0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "segment_index,kind,start_ms,duration_ms,start_deg,end_deg"
        );
        assert_eq!(lines.count(), 7);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn edges_match_oracle(n in 1usize..=64, k in 0.0f64..=1.0) {
                let a = switching_angles(&spec(n, 50.0, k)).unwrap();
                for (i, (rise, fall)) in a.pulses().enumerate() {
                    let (orise, ofall) = oracle_edges(n, k)[i];
                    prop_assert!((rise - orise).abs() < 1e-12);
                    prop_assert!((fall - ofall).abs() < 1e-12);
                }
            }

            #[test]
            fn half_cycle_is_conserved(n in 1usize..=64, f in 10.0f64..=400.0, k in 0.0f64..=1.0) {
                let s = build_schedule(&spec(n, f, k)).unwrap();
                prop_assert!((s.total_ms() - s.half_period_ms).abs() < 1e-9);
                prop_assert!(s.notch_ms.iter().chain(&s.pulse_ms).all(|d| *d >= 0.0));
            }

            #[test]
            fn quarter_wave_symmetry(n in 1usize..=64, k in 0.0f64..=1.0) {
                let s = build_schedule(&spec(n, 50.0, k)).unwrap();
                for i in 0..n {
                    prop_assert!((s.pulse_ms[i] - s.pulse_ms[n - 1 - i]).abs() < 1e-9);
                }
                for i in 0..=n {
                    prop_assert!((s.notch_ms[i] - s.notch_ms[n - i]).abs() < 1e-9);
                }
                for i in 0..n {
                    prop_assert!((s.angles.rising_deg[i] + s.angles.falling_deg[n - 1 - i] - 180.0).abs() < 1e-9);
                }
            }

            #[test]
            fn pulses_never_overlap(n in 1usize..=64, k in 0.0f64..=1.0) {
                let a = switching_angles(&spec(n, 50.0, k)).unwrap();
                for i in 0..n {
                    prop_assert!(a.rising_deg[i] >= -1e-12);
                    prop_assert!(a.rising_deg[i] <= a.falling_deg[i]);
                    prop_assert!(a.falling_deg[i] <= 180.0 + 1e-12);
                    if i + 1 < n {
                        prop_assert!(a.falling_deg[i] <= a.rising_deg[i + 1] + 1e-12);
                    }
                }
            }

            #[test]
            fn widths_monotone_in_k(n in 1usize..=32, k1 in 0.0f64..=1.0, k2 in 0.0f64..=1.0) {
                let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
                let a = spec(n, 50.0, lo);
                let b = spec(n, 50.0, hi);
                for i in 1..=n {
                    prop_assert!(pulse_width_deg(i, &a).unwrap() <= pulse_width_deg(i, &b).unwrap());
                }
            }
        }
    }
}
