//! Compile a [`PulseSchedule`] into a clocked state machine.
//!
//! The target design has three counters, all driven from the board clock:
//!
//! - a prescaler producing one FSM tick every `tick_divider` clock cycles,
//! - a polarity counter toggling `SEL` (the PCS) every half period,
//! - a tick counter that moves to the next state once it reaches the
//!   current state's `TM` constant.
//!
//! States alternate between notch (PWM low) and pulse (PWM high), `2N + 1`
//! per half cycle, and the last state wraps to the first.

mod emit;
mod interp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::PulseSchedule;

pub use emit::{emit_hdl, parse_hdl};
pub use interp::{interpret, InterpretedTrace};

/// Default board clock.
pub const DEFAULT_CLK_HZ: f64 = 50e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockSpec {
    pub clk_hz: f64,
    /// Clock cycles per FSM tick.
    pub tick_divider: u32,
}

impl ClockSpec {
    pub fn new(clk_hz: f64, tick_divider: u32) -> Result<Self> {
        if !(clk_hz.is_finite() && clk_hz > 0.0) {
            return Err(Error::Domain(format!(
                "clk_hz must be positive, got {clk_hz}"
            )));
        }
        if tick_divider == 0 {
            return Err(Error::Domain("tick_divider must be at least 1".into()));
        }
        Ok(Self {
            clk_hz,
            tick_divider,
        })
    }

    pub fn tick_seconds(&self) -> f64 {
        self.tick_divider as f64 / self.clk_hz
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmState {
    pub name: String,
    /// PWM output while in this state.
    pub level: u8,
    /// Ticks spent in this state (the `TM` constant).
    pub ticks: u64,
}

/// Quantized state table plus the constants of the emitted design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsmProgram {
    pub states: Vec<FsmState>,
    pub tick_divider: u32,
    /// Clock cycles between `SEL` toggles.
    #[serde(rename = "polarity_count")]
    pub polarity_half_period_clocks: u64,
    pub clk_hz: f64,
}

impl FsmProgram {
    pub fn n_pulses(&self) -> usize {
        self.states.len() / 2
    }

    pub fn half_period_ticks(&self) -> u64 {
        self.states.iter().map(|s| s.ticks).sum()
    }

    pub fn high_ticks(&self) -> u64 {
        self.states
            .iter()
            .filter(|s| s.level == 1)
            .map(|s| s.ticks)
            .sum()
    }

    pub fn tick_counts(&self) -> Vec<u64> {
        self.states.iter().map(|s| s.ticks).collect()
    }

    /// Fundamental frequency set by the polarity counter.
    pub fn fundamental_hz(&self) -> f64 {
        self.clk_hz / (2.0 * self.polarity_half_period_clocks as f64)
    }

    /// State boundaries in ticks from the start of the half cycle.
    pub fn boundaries_ticks(&self) -> Vec<u64> {
        let mut acc = 0;
        let mut out = vec![0];
        for s in &self.states {
            acc += s.ticks;
            out.push(acc);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() || self.states.len().is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "a program needs an odd number of states, got {}",
                self.states.len()
            )));
        }
        for (i, s) in self.states.iter().enumerate() {
            let want = (i % 2) as u8;
            if s.level != want {
                return Err(Error::Domain(format!(
                    "state {} must drive {want}, drives {}",
                    s.name, s.level
                )));
            }
            if s.ticks == 0 {
                return Err(Error::Domain(format!("state {} has zero ticks", s.name)));
            }
        }
        if self.tick_divider == 0 || self.polarity_half_period_clocks == 0 {
            return Err(Error::Domain(
                "divider and polarity count must be positive".into(),
            ));
        }
        if !(self.clk_hz.is_finite() && self.clk_hz > 0.0) {
            return Err(Error::Domain(format!(
                "clk_hz must be positive, got {}",
                self.clk_hz
            )));
        }
        Ok(())
    }

    /// `{states:[{name,level,ticks}], tick_divider, polarity_count, clk_hz}`.
    pub fn sidecar_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Convert the schedule's segments to whole ticks.
///
/// Every segment boundary is rounded to the nearest tick and state lengths
/// are the differences, so no edge moves by more than half a tick and the
/// half period holds exactly `round(half_period / tick)` ticks.
pub fn quantize(schedule: &PulseSchedule, clock: &ClockSpec) -> Result<FsmProgram> {
    let tick_s = clock.tick_seconds();
    let to_ticks = |ms: f64| ms / 1000.0 / tick_s;

    let durations = schedule.durations_ms();
    if let Some((segment, ms)) = durations
        .iter()
        .copied()
        .enumerate()
        .find(|(_, ms)| to_ticks(*ms) < 1.0 - 1e-9)
    {
        let max_divider = (ms / 1000.0 * clock.clk_hz).floor() as u64;
        return Err(Error::Resolution {
            segment,
            ticks: to_ticks(ms),
            max_divider,
        });
    }

    let edges = schedule.boundaries_ms();
    let rounded: Vec<u64> = edges
        .iter()
        .map(|ms| to_ticks(*ms).round() as u64)
        .collect();
    let states = rounded
        .windows(2)
        .enumerate()
        .map(|(i, w)| FsmState {
            name: format!("S{}", i + 1),
            level: (i % 2) as u8,
            ticks: w[1] - w[0],
        })
        .collect();

    let polarity = (clock.clk_hz / (2.0 * schedule.spec.frequency_hz)).round();
    if polarity < 1.0 {
        return Err(Error::Domain(format!(
            "clock {} Hz cannot time a {} Hz polarity signal",
            clock.clk_hz, schedule.spec.frequency_hz
        )));
    }

    Ok(FsmProgram {
        states,
        tick_divider: clock.tick_divider,
        polarity_half_period_clocks: polarity as u64,
        clk_hz: clock.clk_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{build_schedule, ModulationSpec};

    fn schedule(n: usize, f: f64, k: f64) -> PulseSchedule {
        build_schedule(&ModulationSpec::new(n, f, k, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn n3_counts() {
        let clock = ClockSpec::new(50e6, 10).unwrap();
        let p = quantize(&schedule(3, 50.0, 1.0), &clock).unwrap();
        assert_eq!(p.tick_counts(), [4167, 8333, 4167, 16666, 4167, 8333, 4167]);
        assert_eq!(p.half_period_ticks(), 50_000);
        assert_eq!(p.polarity_half_period_clocks, 500_000);
        let levels: Vec<u8> = p.states.iter().map(|s| s.level).collect();
        assert_eq!(levels, [0, 1, 0, 1, 0, 1, 0]);
        p.validate().unwrap();
    }

    #[test]
    fn divisible_case_is_exact() {
        // N = 1, K = 0.5: 45°/90°/45° of a 10 ms half cycle at 1 µs ticks.
        let clock = ClockSpec::new(1e6, 1).unwrap();
        let p = quantize(&schedule(1, 50.0, 0.5), &clock).unwrap();
        assert_eq!(p.tick_counts(), [2500, 5000, 2500]);
    }

    #[test]
    fn too_coarse_tick_is_a_resolution_error() {
        let clock = ClockSpec::new(50e6, 100_000).unwrap();
        match quantize(&schedule(3, 50.0, 1.0), &clock) {
            Err(Error::Resolution { max_divider, .. }) => assert_eq!(max_divider, 41_666),
            other => panic!("expected resolution error, got {other:?}"),
        }
        // Zero-width notches can never be timed.
        let clock = ClockSpec::new(50e6, 10).unwrap();
        assert!(matches!(
            quantize(&schedule(1, 50.0, 1.0), &clock),
            Err(Error::Resolution { max_divider: 0, .. })
        ));
    }

    #[test]
    fn edges_within_half_tick() {
        let mut checked = 0;
        for n in [2, 5, 8, 15, 31, 64] {
            for f in [10.0, 50.0, 60.0, 123.0, 400.0] {
                let s = schedule(n, f, 1.0);
                let clock = ClockSpec::new(50e6, 10).unwrap();
                // Centre notches of large N at high f are shorter than a tick.
                let Ok(p) = quantize(&s, &clock) else {
                    continue;
                };
                checked += 1;
                let tick_ms = clock.tick_seconds() * 1000.0;
                for (ideal, got) in s.boundaries_ms().iter().zip(p.boundaries_ticks()) {
                    assert!((ideal / tick_ms - got as f64).abs() <= 0.5 + 1e-9);
                }
                let exact = s.half_period_ms / tick_ms;
                assert_eq!(p.half_period_ticks(), exact.round() as u64);
            }
        }
        assert!(checked >= 20, "only {checked} cases were representable");
    }

    #[test]
    fn sidecar_keys() {
        let clock = ClockSpec::new(50e6, 10).unwrap();
        let p = quantize(&schedule(3, 50.0, 1.0), &clock).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.sidecar_json().unwrap()).unwrap();
        assert_eq!(v["polarity_count"], 500_000);
        assert_eq!(v["tick_divider"], 10);
        assert_eq!(v["clk_hz"], 50e6);
        assert_eq!(v["states"][3]["name"], "S4");
        assert_eq!(v["states"][3]["level"], 1);
        assert_eq!(v["states"][3]["ticks"], 16_666);
    }
}
