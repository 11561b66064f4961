//! PV array and battery bank sizing from a 24-hour load profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default equivalent peak sun-hours per day.
pub const DEFAULT_SUN_HOURS: f64 = 6.2;

/// Load in watts for each one-hour slot of a day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DailyLoadProfile {
    hourly_w: [f64; 24],
}

impl DailyLoadProfile {
    pub fn new(hourly_w: [f64; 24]) -> Result<Self> {
        if let Some((hour, w)) = hourly_w
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::Domain(format!("hour {hour} has invalid load {w} W")));
        }
        Ok(Self { hourly_w })
    }

    pub fn uniform(watts: f64) -> Result<Self> {
        Self::new([watts; 24])
    }

    /// Spread each appliance's daily energy evenly over the 24 hours.
    pub fn from_daily_energies(energies_wh: &[f64]) -> Result<Self> {
        let total: f64 = energies_wh.iter().sum();
        Self::uniform(total / 24.0)
    }

    pub fn hourly_w(&self) -> &[f64; 24] {
        &self.hourly_w
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.hourly_w.map(|w| w * factor))
    }
}

impl TryFrom<Vec<f64>> for DailyLoadProfile {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        let hourly: [f64; 24] = values.try_into().map_err(|v: Vec<f64>| {
            Error::Domain(format!(
                "a daily profile needs 24 hourly values, got {}",
                v.len()
            ))
        })?;
        Self::new(hourly)
    }
}

impl From<DailyLoadProfile> for Vec<f64> {
    fn from(p: DailyLoadProfile) -> Self {
        p.hourly_w.to_vec()
    }
}

/// Daily energy in Wh; each slot is one hour so W and Wh coincide per slot.
pub fn daily_energy(profile: &DailyLoadProfile) -> f64 {
    profile.hourly_w.iter().sum()
}

/// PV array rating in watts that delivers `daily_wh` over `sun_hours`.
pub fn pv_size(daily_wh: f64, sun_hours: f64) -> Result<f64> {
    if !(sun_hours.is_finite() && sun_hours > 0.0) {
        return Err(Error::Domain(format!(
            "sun_hours must be positive, got {sun_hours}"
        )));
    }
    Ok(daily_wh / sun_hours)
}

/// Battery capacity in Ah holding `critical_wh` at `battery_volts`.
pub fn battery_size(critical_wh: f64, battery_volts: f64) -> Result<f64> {
    if !(battery_volts.is_finite() && battery_volts > 0.0) {
        return Err(Error::Domain(format!(
            "battery_volts must be positive, got {battery_volts}"
        )));
    }
    Ok(critical_wh / battery_volts)
}

/// Optional multipliers on the raw results (derating, autonomy). Both 1 by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizingFactors {
    pub pv_factor: f64,
    pub battery_factor: f64,
}

impl Default for SizingFactors {
    fn default() -> Self {
        Self {
            pv_factor: 1.0,
            battery_factor: 1.0,
        }
    }
}

/// JSON input of the `size` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingRequest {
    pub hourly_w: DailyLoadProfile,
    #[serde(default = "default_sun_hours")]
    pub sun_hours: f64,
    pub battery_volts: f64,
    #[serde(default, flatten)]
    pub factors: SizingFactors,
}

fn default_sun_hours() -> f64 {
    DEFAULT_SUN_HOURS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizingResult {
    pub daily_wh: f64,
    pub pv_watts: f64,
    pub battery_ah: f64,
}

/// The whole profile is treated as critical load.
pub fn size(request: &SizingRequest) -> Result<SizingResult> {
    let daily_wh = daily_energy(&request.hourly_w);
    Ok(SizingResult {
        daily_wh,
        pv_watts: pv_size(daily_wh, request.sun_hours)? * request.factors.pv_factor,
        battery_ah: battery_size(daily_wh, request.battery_volts)? * request.factors.battery_factor,
    })
}
