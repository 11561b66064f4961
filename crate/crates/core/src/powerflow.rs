//! Hybrid PV / battery / grid / DG controller.
//!
//! Source voltages are reduced to health bits, the bits pick the load source
//! and battery mode, and the resulting power budget switches loads on in
//! priority order.
//!
//! Routing for level combinations outside the four documented rows:
//! the load is fed from the first healthy source in GRID, DG, BATTERY order.
//! The battery charges whenever grid or DG carries the load and the battery
//! is healthy, discharges when it carries the load itself, and idles
//! otherwise. The PV bit never changes the route; it only adds PV power to
//! the budget.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PV_MIN_VOLTS: f64 = 12.0;
pub const BATTERY_MIN_VOLTS: f64 = 10.1;
pub const BATTERY_MAX_VOLTS: f64 = 13.8;
pub const AC_NOMINAL_VOLTS: f64 = 220.0;
pub const AC_MIN_VOLTS: f64 = 198.0;
pub const AC_MAX_VOLTS: f64 = 242.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSnapshot {
    pub pv_volts: f64,
    pub battery_volts: f64,
    pub grid_volts: f64,
    pub dg_available: bool,
    pub dg_volts: f64,
}

impl SourceSnapshot {
    pub fn validate(&self) -> Result<()> {
        let volts = [
            ("pv_volts", self.pv_volts),
            ("battery_volts", self.battery_volts),
            ("grid_volts", self.grid_volts),
            ("dg_volts", self.dg_volts),
        ];
        for (name, v) in volts {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Health bit per source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicLevels {
    pub pv: bool,
    pub grid: bool,
    pub dg: bool,
    pub battery: bool,
}

impl LogicLevels {
    pub fn new(pv: bool, grid: bool, dg: bool, battery: bool) -> Self {
        Self {
            pv,
            grid,
            dg,
            battery,
        }
    }

    /// All sixteen combinations, `pv` as the most significant bit.
    pub fn all() -> impl Iterator<Item = LogicLevels> {
        (0u8..16).map(|bits| LogicLevels {
            pv: bits & 0b1000 != 0,
            grid: bits & 0b0100 != 0,
            dg: bits & 0b0010 != 0,
            battery: bits & 0b0001 != 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BatteryMode {
    Charging,
    Discharging,
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LoadSource {
    Grid,
    Battery,
    Dg,
    None,
}

impl BatteryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BatteryMode::Charging => "CHARGING",
            BatteryMode::Discharging => "DISCHARGING",
            BatteryMode::Idle => "IDLE",
        }
    }
}

impl LoadSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadSource::Grid => "GRID",
            LoadSource::Battery => "BATTERY",
            LoadSource::Dg => "DG",
            LoadSource::None => "NONE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerDecision {
    pub battery_mode: BatteryMode,
    pub load_source: LoadSource,
}

fn ac_in_window(volts: f64) -> bool {
    (AC_MIN_VOLTS..=AC_MAX_VOLTS).contains(&volts)
}

/// Health bits. All thresholds are closed intervals.
pub fn classify(snapshot: &SourceSnapshot) -> LogicLevels {
    LogicLevels {
        pv: snapshot.pv_volts >= PV_MIN_VOLTS,
        battery: (BATTERY_MIN_VOLTS..=BATTERY_MAX_VOLTS).contains(&snapshot.battery_volts),
        grid: ac_in_window(snapshot.grid_volts),
        dg: snapshot.dg_available && ac_in_window(snapshot.dg_volts),
    }
}

pub fn route(levels: LogicLevels) -> PowerDecision {
    let load_source = if levels.grid {
        LoadSource::Grid
    } else if levels.dg {
        LoadSource::Dg
    } else if levels.battery {
        LoadSource::Battery
    } else {
        LoadSource::None
    };
    let battery_mode = match (load_source, levels.battery) {
        (LoadSource::Battery, _) => BatteryMode::Discharging,
        (LoadSource::Grid | LoadSource::Dg, true) => BatteryMode::Charging,
        _ => BatteryMode::Idle,
    };
    PowerDecision {
        battery_mode,
        load_source,
    }
}

/// Rated power of each source in watts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceRatings {
    pub pv_w: f64,
    pub battery_w: f64,
    pub grid_w: f64,
    pub dg_w: f64,
}

/// Rated power available to the load: the PV/battery term plus the grid/DG
/// term of the energy balance, for the route the levels select.
pub fn available_power(levels: LogicLevels, ratings: &SourceRatings) -> f64 {
    let decision = route(levels);
    if decision.load_source == LoadSource::None {
        return 0.0;
    }
    let mut watts = 0.0;
    if levels.pv {
        watts += ratings.pv_w;
    }
    if decision.battery_mode == BatteryMode::Discharging {
        watts += ratings.battery_w;
    }
    watts += match decision.load_source {
        LoadSource::Grid => ratings.grid_w,
        LoadSource::Dg => ratings.dg_w,
        _ => 0.0,
    };
    watts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadItem {
    pub name: String,
    pub power_w: f64,
    /// 1 is the highest priority.
    pub priority: u32,
}

impl LoadItem {
    pub fn new(name: impl Into<String>, power_w: f64, priority: u32) -> Self {
        Self {
            name: name.into(),
            power_w,
            priority,
        }
    }
}

pub fn validate_loads(loads: &[LoadItem]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for load in loads {
        if !(load.power_w.is_finite() && load.power_w > 0.0) {
            return Err(Error::Domain(format!(
                "load {:?} must draw positive power",
                load.name
            )));
        }
        if load.priority == 0 {
            return Err(Error::Domain(format!(
                "load {:?} has priority 0; priorities start at 1",
                load.name
            )));
        }
        if !seen.insert(load.priority) {
            return Err(Error::Domain(format!(
                "duplicate load priority {}",
                load.priority
            )));
        }
    }
    Ok(())
}

/// Switch loads on one by one in priority order while the running total fits
/// the budget. Switching stops at the first load that does not fit, so a
/// lower budget always selects a prefix of a higher budget's selection.
pub fn select_loads(loads: &[LoadItem], available_w: f64) -> Result<Vec<LoadItem>> {
    validate_loads(loads)?;
    let mut ordered: Vec<&LoadItem> = loads.iter().collect();
    ordered.sort_by_key(|l| l.priority);
    let mut total = 0.0;
    let mut selected = Vec::new();
    for load in ordered {
        if total + load.power_w > available_w {
            break;
        }
        total += load.power_w;
        selected.push(load.clone());
    }
    Ok(selected)
}

/// Scenario input for [`simulate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub ratings: SourceRatings,
    pub loads: Vec<LoadItem>,
    pub snapshots: Vec<TimedSnapshot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedSnapshot {
    pub t: f64,
    #[serde(flatten)]
    pub snapshot: SourceSnapshot,
}

/// One row of the decision trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub t: f64,
    pub levels: LogicLevels,
    pub decision: PowerDecision,
    pub available_w: f64,
    pub loads_on: Vec<String>,
}

/// Run the controller over every snapshot in order.
pub fn simulate(scenario: &Scenario) -> Result<Vec<DecisionRecord>> {
    validate_loads(&scenario.loads)?;
    scenario
        .snapshots
        .iter()
        .map(|step| {
            step.snapshot.validate()?;
            let levels = classify(&step.snapshot);
            let available_w = available_power(levels, &scenario.ratings);
            let loads_on = select_loads(&scenario.loads, available_w)?
                .into_iter()
                .map(|l| l.name)
                .collect();
            Ok(DecisionRecord {
                t: step.t,
                levels,
                decision: route(levels),
                available_w,
                loads_on,
            })
        })
        .collect()
}

/// `t,pv_bit,grid_bit,dg_bit,battery_bit,battery_mode,load_source,loads_on`
/// CSV; `loads_on` names are joined with `;`.
pub fn write_trace_csv<W: Write>(records: &[DecisionRecord], writer: W) -> Result<()> {
    let bit = |b: bool| if b { "1" } else { "0" };
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "t",
        "pv_bit",
        "grid_bit",
        "dg_bit",
        "battery_bit",
        "battery_mode",
        "load_source",
        "loads_on",
    ])?;
    for r in records {
        wtr.write_record([
            r.t.to_string().as_str(),
            bit(r.levels.pv),
            bit(r.levels.grid),
            bit(r.levels.dg),
            bit(r.levels.battery),
            r.decision.battery_mode.as_str(),
            r.decision.load_source.as_str(),
            r.loads_on.join(";").as_str(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
