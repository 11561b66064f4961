//! VHDL rendering of an [`FsmProgram`] in behavioural process/case style,
//! and the matching parser used to check emitted text.

use std::fmt::Write;
use std::sync::OnceLock;

use regex::Regex;

use super::{FsmProgram, FsmState};
use crate::error::{Error, Result};

/// Render the program. Output depends only on the arguments.
pub fn emit_hdl(program: &FsmProgram, entity_name: &str) -> Result<String> {
    program.validate()?;
    let entity = entity_name;
    let divider = program.tick_divider;
    let polarity = program.polarity_half_period_clocks;
    let tm_max = program.states.iter().map(|s| s.ticks).max().unwrap_or(1);
    let names: Vec<&str> = program.states.iter().map(|s| s.name.as_str()).collect();
    let period_ms = 2.0 * polarity as f64 / program.clk_hz * 1000.0;

    let mut out = String::new();
    // `write!` into a String cannot fail.
    let w = &mut out;
    let _ = writeln!(
        w,
        "-- Sinusoidal PWM pulse generation, N={}",
        program.n_pulses()
    );
    let _ = writeln!(w, "-- clk_hz: {}", program.clk_hz);
    let _ = writeln!(w, "-- tick_divider: {divider}");
    let _ = writeln!(w, "library IEEE;");
    let _ = writeln!(w, "use IEEE.STD_LOGIC_1164.ALL;");
    let _ = writeln!(w, "use IEEE.STD_LOGIC_ARITH.ALL;");
    let _ = writeln!(w, "use IEEE.STD_LOGIC_UNSIGNED.ALL;");
    let _ = writeln!(w, "entity {entity} is");
    let _ = writeln!(w, "  Port ( CLK : in STD_LOGIC;");
    let _ = writeln!(w, "        SEL : buffer STD_LOGIC := '1';");
    if divider == 1 {
        let _ = writeln!(w, "        PWM : out STD_LOGIC);");
    } else {
        let _ = writeln!(w, "        PWM : out STD_LOGIC;");
        let _ = writeln!(w, "        WAVE1 : buffer STD_LOGIC := '0');");
    }
    let _ = writeln!(w, "end {entity};");
    let _ = writeln!(w);
    let _ = writeln!(w, "architecture Behavioral of {entity} is");
    let _ = writeln!(w, "type STATE is ({});", names.join(","));
    let _ = writeln!(w, "SIGNAL PR,NX:STATE;");
    let _ = writeln!(w, "SIGNAL TM:INTEGER RANGE 0 TO {tm_max};");
    let _ = writeln!(w, "begin");

    // Prescaler.
    if divider > 1 {
        let (limit, body): (u32, &[&str]) = if divider.is_multiple_of(2) {
            (
                divider / 2,
                &["WAVE1<= NOT WAVE1;", "COUNT1:=0;", "END IF;"],
            )
        } else {
            (
                divider,
                &[
                    "WAVE1<='1';",
                    "COUNT1:=0;",
                    "ELSE",
                    "WAVE1<='0';",
                    "END IF;",
                ],
            )
        };
        let _ = writeln!(w, "PROCESS(CLK)");
        let _ = writeln!(w, "VARIABLE COUNT1:INTEGER RANGE 0 TO {limit};");
        let _ = writeln!(w, "BEGIN");
        let _ = writeln!(w, "IF(CLK'EVENT AND CLK='1')THEN");
        let _ = writeln!(w, "COUNT1:=COUNT1+1;");
        let _ = writeln!(w, "IF(COUNT1={limit})THEN");
        for line in body {
            let _ = writeln!(w, "{line}");
        }
        let _ = writeln!(w, "END IF;");
        let _ = writeln!(w, "END PROCESS;");
        let _ = writeln!(w);
    }

    // Polarity.
    let _ = writeln!(w, "PROCESS(CLK)");
    let _ = writeln!(w, "VARIABLE count2:INTEGER RANGE 0 TO {polarity};");
    let _ = writeln!(w, "begin");
    let _ = writeln!(w, "IF(CLK'EVENT and CLK='1') THEN");
    let _ = writeln!(w, "count2:=count2+1;");
    let _ = writeln!(w, "IF(count2={polarity}) THEN");
    let _ = writeln!(w, "SEL<=NOT SEL;--{period_ms}ms");
    let _ = writeln!(w, "count2:=0;");
    let _ = writeln!(w, "END IF;");
    let _ = writeln!(w, "END IF;");
    let _ = writeln!(w, "END PROCESS;");
    let _ = writeln!(w);

    // Tick counter.
    let tick = if divider == 1 { "CLK" } else { "WAVE1" };
    let _ = writeln!(w, "PROCESS({tick})");
    let _ = writeln!(w, "VARIABLE COUNT :INTEGER RANGE 0 TO {tm_max};");
    let _ = writeln!(w, "BEGIN");
    let _ = writeln!(w, "IF({tick}'EVENT AND {tick}='1')THEN");
    let _ = writeln!(w, "COUNT:=COUNT+1;");
    let _ = writeln!(w, "IF(COUNT=TM)THEN");
    let _ = writeln!(w, "PR<=NX;");
    let _ = writeln!(w, "COUNT:=0;");
    let _ = writeln!(w, "END IF;");
    let _ = writeln!(w, "END IF;");
    let _ = writeln!(w, "END PROCESS;");

    // State table.
    let _ = writeln!(w, "PROCESS(PR)");
    let _ = writeln!(w, "BEGIN");
    let _ = writeln!(w, "CASE PR IS");
    for (i, state) in program.states.iter().enumerate() {
        let next = &program.states[(i + 1) % program.states.len()].name;
        let _ = writeln!(w, "WHEN {}=>", state.name);
        let _ = writeln!(w, "    PWM<='{}';", state.level);
        let _ = writeln!(w, "    TM<={};", state.ticks);
        let _ = writeln!(w, "    NX<={next};");
    }
    let _ = writeln!(w, "END CASE;");
    let _ = writeln!(w, "END PROCESS;");
    let _ = writeln!(w);
    let _ = writeln!(w, "end Behavioral;");
    Ok(out)
}

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static pattern"))
}

fn capture_u64(re: &Regex, text: &str) -> Option<u64> {
    re.captures(text).and_then(|c| c[1].parse().ok())
}

/// Recover the program table from emitted VHDL.
pub fn parse_hdl(text: &str) -> Result<FsmProgram> {
    static CLK: OnceLock<Regex> = OnceLock::new();
    static TOGGLE: OnceLock<Regex> = OnceLock::new();
    static STROBE: OnceLock<Regex> = OnceLock::new();
    static POLARITY: OnceLock<Regex> = OnceLock::new();
    static ARM: OnceLock<Regex> = OnceLock::new();

    let clk_hz = regex(&CLK, r"--\s*clk_hz:\s*([0-9.eE+\-]+)")
        .captures(text)
        .and_then(|c| c[1].parse::<f64>().ok())
        .ok_or_else(|| Error::HdlParse("missing clk_hz header".into()))?;

    let tick_divider = if let Some(half) = capture_u64(
        regex(&TOGGLE, r"IF\(COUNT1=(\d+)\)THEN\s*WAVE1<= NOT WAVE1;"),
        text,
    ) {
        2 * half
    } else if let Some(d) = capture_u64(
        regex(&STROBE, r"IF\(COUNT1=(\d+)\)THEN\s*WAVE1<='1';"),
        text,
    ) {
        d
    } else if !text.contains("COUNT1") {
        1
    } else {
        return Err(Error::HdlParse("unrecognised prescaler process".into()));
    };
    let tick_divider = u32::try_from(tick_divider)
        .map_err(|_| Error::HdlParse(format!("tick divider {tick_divider} too large")))?;

    let polarity_half_period_clocks =
        capture_u64(regex(&POLARITY, r"IF\(count2=(\d+)\) THEN"), text)
            .ok_or_else(|| Error::HdlParse("missing polarity counter".into()))?;

    let arm = regex(
        &ARM,
        r"WHEN (S\d+)=>\s*PWM<='([01])';\s*TM<=(\d+);\s*NX<=(S\d+);",
    );
    let mut states = Vec::new();
    let mut successors = Vec::new();
    for c in arm.captures_iter(text) {
        states.push(FsmState {
            name: c[1].to_string(),
            level: c[2]
                .parse()
                .map_err(|_| Error::HdlParse("bad level".into()))?,
            ticks: c[3]
                .parse()
                .map_err(|_| Error::HdlParse(format!("bad TM in {}", &c[1])))?,
        });
        successors.push(c[4].to_string());
    }
    if states.is_empty() {
        return Err(Error::HdlParse("no state arms found".into()));
    }
    for (i, next) in successors.iter().enumerate() {
        let want = &states[(i + 1) % states.len()].name;
        if next != want {
            return Err(Error::HdlParse(format!(
                "{} jumps to {next}, expected {want}",
                states[i].name
            )));
        }
    }

    let program = FsmProgram {
        states,
        tick_divider,
        polarity_half_period_clocks,
        clk_hz,
    };
    program.validate()?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdlgen::{quantize, ClockSpec};
    use crate::schedule::{build_schedule, ModulationSpec};

    fn program(n: usize, divider: u32) -> FsmProgram {
        let s = build_schedule(&ModulationSpec::new(n, 50.0, 1.0, 1.0).unwrap()).unwrap();
        quantize(&s, &ClockSpec::new(50e6, divider).unwrap()).unwrap()
    }

    #[test]
    fn n3_structure() {
        let p = program(3, 10);
        let text = emit_hdl(&p, "N3").unwrap();
        assert_eq!(text.matches("WHEN S").count(), 7);
        assert!(text.contains("type STATE is (S1,S2,S3,S4,S5,S6,S7);"));
        assert!(text.contains("IF(COUNT1=5)THEN\nWAVE1<= NOT WAVE1;"));
        assert!(text.contains("IF(count2=500000) THEN\nSEL<=NOT SEL;--20ms"));
        for tm in p.tick_counts() {
            assert!(text.contains(&format!("TM<={tm};")));
        }
        assert!(text.contains("WHEN S7=>\n    PWM<='0';\n    TM<=4167;\n    NX<=S1;"));
        assert!(text.contains("entity N3 is"));
    }

    #[test]
    fn deterministic() {
        let p = program(5, 10);
        assert_eq!(emit_hdl(&p, "N5").unwrap(), emit_hdl(&p, "N5").unwrap());
    }

    #[test]
    fn round_trip_all_prescaler_styles() {
        for divider in [1, 7, 10] {
            let p = program(3, divider);
            let text = emit_hdl(&p, "pwm").unwrap();
            assert_eq!(parse_hdl(&text).unwrap(), p, "divider {divider}");
        }
    }

    #[test]
    fn parse_rejects_broken_chain() {
        let text = emit_hdl(&program(3, 10), "N3").unwrap();
        let broken = text.replace("NX<=S3;", "NX<=S5;");
        assert!(matches!(parse_hdl(&broken), Err(Error::HdlParse(_))));
        assert!(parse_hdl("entity x is end x;").is_err());
    }
}
