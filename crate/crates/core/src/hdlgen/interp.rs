//! Cycle-accurate model of the emitted design.
//!
//! Sample `k` of every trace is the value held after the `k`-th rising clock
//! edge; sample 0 is the power-on state (`S1`, `SEL = '1'`, `WAVE1 = '0'`).
//! With an even divider `WAVE1` toggles every `divider/2` clocks, so the
//! first tick lands half a tick early relative to the schedule. That offset
//! is part of the reference semantics.

use super::FsmProgram;
use crate::error::{Error, Result};
use crate::waveform::{SignalKind, WaveformTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct InterpretedTrace {
    pub mss: WaveformTrace,
    pub pcs: WaveformTrace,
}

impl InterpretedTrace {
    /// Three-level output, `±amplitude` by PCS during pulses.
    pub fn output(&self, amplitude: f64) -> WaveformTrace {
        let samples = self
            .mss
            .samples
            .iter()
            .zip(&self.pcs.samples)
            .map(|(&m, &p)| match (m != 0.0, p != 0.0) {
                (false, _) => 0.0,
                (true, true) => amplitude,
                (true, false) => -amplitude,
            })
            .collect();
        WaveformTrace {
            signal_kind: SignalKind::Output,
            samples,
            ..self.mss.clone()
        }
    }
}

enum Prescaler {
    Direct,
    Toggle { half: u32, count: u32, wave: bool },
    Strobe { limit: u32, count: u32, wave: bool },
}

impl Prescaler {
    fn new(divider: u32) -> Self {
        match divider {
            1 => Prescaler::Direct,
            d if d % 2 == 0 => Prescaler::Toggle {
                half: d / 2,
                count: 0,
                wave: false,
            },
            d => Prescaler::Strobe {
                limit: d,
                count: 0,
                wave: false,
            },
        }
    }

    /// Advance one clock edge; true when `WAVE1` (or `CLK`) rises.
    fn clock(&mut self) -> bool {
        match self {
            Prescaler::Direct => true,
            Prescaler::Toggle { half, count, wave } => {
                *count += 1;
                if *count == *half {
                    *count = 0;
                    *wave = !*wave;
                    *wave
                } else {
                    false
                }
            }
            Prescaler::Strobe { limit, count, wave } => {
                *count += 1;
                let next = *count == *limit;
                if next {
                    *count = 0;
                }
                let rose = next && !*wave;
                *wave = next;
                rose
            }
        }
    }
}

/// Simulate `n_clock_cycles` clock periods of the design.
pub fn interpret(program: &FsmProgram, n_clock_cycles: u64) -> Result<InterpretedTrace> {
    program.validate()?;
    let period = 2 * program.polarity_half_period_clocks;
    if n_clock_cycles < period {
        return Err(Error::Domain(format!(
            "{n_clock_cycles} clock cycles do not cover one fundamental period ({period})"
        )));
    }

    let len = n_clock_cycles as usize;
    let mut mss = Vec::with_capacity(len);
    let mut pcs = Vec::with_capacity(len);

    let mut prescaler = Prescaler::new(program.tick_divider);
    let mut state = 0usize;
    let mut count = 0u64;
    let mut count2 = 0u64;
    let mut sel = true;

    mss.push(program.states[state].level as f64);
    pcs.push(1.0);
    for _ in 1..len {
        count2 += 1;
        if count2 == program.polarity_half_period_clocks {
            sel = !sel;
            count2 = 0;
        }
        if prescaler.clock() {
            count += 1;
            if count == program.states[state].ticks {
                state = (state + 1) % program.states.len();
                count = 0;
            }
        }
        mss.push(program.states[state].level as f64);
        pcs.push(if sel { 1.0 } else { 0.0 });
    }

    let trace = |kind, samples| WaveformTrace {
        sample_rate_hz: program.clk_hz,
        fundamental_hz: program.fundamental_hz(),
        signal_kind: kind,
        duration_ms: n_clock_cycles as f64 / program.clk_hz * 1000.0,
        samples,
    };
    Ok(InterpretedTrace {
        mss: trace(SignalKind::Mss, mss),
        pcs: trace(SignalKind::Pcs, pcs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdlgen::{quantize, ClockSpec, FsmState};
    use crate::schedule::{build_schedule, ModulationSpec};

    fn n3() -> FsmProgram {
        let s = build_schedule(&ModulationSpec::new(3, 50.0, 1.0, 1.0).unwrap()).unwrap();
        quantize(&s, &ClockSpec::new(50e6, 10).unwrap()).unwrap()
    }

    #[test]
    fn high_time_per_half_cycle() {
        let p = n3();
        let t = interpret(&p, 1_000_000).unwrap();
        let first: f64 = t.mss.samples[..500_000].iter().sum();
        let second: f64 = t.mss.samples[500_000..].iter().sum();
        let want = (p.high_ticks() * 10) as f64;
        assert_eq!(first, want);
        assert_eq!(second, want);
        assert_eq!(p.high_ticks(), 8333 + 16666 + 8333);
    }

    #[test]
    fn pcs_toggles_every_half_period() {
        let t = interpret(&n3(), 1_000_000).unwrap();
        assert!(t.pcs.samples[..500_000].iter().all(|v| *v == 1.0));
        assert!(t.pcs.samples[500_000..].iter().all(|v| *v == 0.0));
        assert_eq!(t.pcs.cycles(), 1.0);
    }

    #[test]
    fn first_edge_is_half_a_tick_early() {
        let t = interpret(&n3(), 1_000_000).unwrap();
        assert_eq!(t.mss.transitions()[0], 4167 * 10 - 5);
    }

    #[test]
    fn one_tick_states() {
        let states = (0..7)
            .map(|i| FsmState {
                name: format!("S{}", i + 1),
                level: (i % 2) as u8,
                ticks: 1,
            })
            .collect();
        let p = FsmProgram {
            states,
            tick_divider: 4,
            polarity_half_period_clocks: 14,
            clk_hz: 1e3,
        };
        let t = interpret(&p, 28 * 4).unwrap();
        let s = &t.mss.samples;
        // The state sequence repeats every 7 ticks = 28 clocks.
        for k in 0..s.len() - 28 {
            assert_eq!(s[k], s[k + 28]);
        }
        assert_ne!(s[2..30], s[2 + 4..30 + 4]);
    }

    #[test]
    fn too_short_run_rejected() {
        assert!(interpret(&n3(), 999_999).is_err());
    }

    #[test]
    fn odd_divider_ticks_every_divider_clocks() {
        let mut p = Prescaler::new(3);
        let ticks: Vec<bool> = (0..9).map(|_| p.clock()).collect();
        assert_eq!(
            ticks,
            [false, false, true, false, false, true, false, false, true]
        );
        let mut p = Prescaler::new(4);
        let ticks: Vec<bool> = (0..8).map(|_| p.clock()).collect();
        assert_eq!(
            ticks,
            [false, true, false, false, false, true, false, false]
        );
    }
}
