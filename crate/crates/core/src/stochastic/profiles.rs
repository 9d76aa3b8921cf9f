use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SimRng;
use crate::grid::ConfigError;

/// Cosine daily and seasonal demand shape with additive Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandParams {
    /// MW
    pub base: f64,
    /// MW
    pub daily_amplitude: f64,
    /// Hour of day at which the daily cosine peaks.
    pub daily_peak_hour: f64,
    /// MW, peaks on day 0.
    pub seasonal_amplitude: f64,
    /// MW
    pub noise_sd: f64,
}

/// Half-sine diurnal solar shape with multiplicative Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarParams {
    /// MW at solar noon.
    pub peak: f64,
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    pub noise_factor_sd: f64,
}

/// Weibull availability proxy for wind power, capped at `cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindParams {
    /// Weibull scale, MW.
    pub scale: f64,
    /// Weibull shape.
    pub shape: f64,
    /// MW
    pub cap: f64,
}

impl Default for DemandParams {
    fn default() -> Self {
        Self {
            base: 100.0,
            daily_amplitude: 20.0,
            daily_peak_hour: 18.0,
            seasonal_amplitude: 5.0,
            noise_sd: 2.0,
        }
    }
}

impl Default for SolarParams {
    fn default() -> Self {
        Self {
            peak: 30.0,
            sunrise_hour: 6.0,
            sunset_hour: 18.0,
            noise_factor_sd: 0.05,
        }
    }
}

impl Default for WindParams {
    fn default() -> Self {
        Self {
            scale: 8.0,
            shape: 2.0,
            cap: 16.0,
        }
    }
}

fn check(ok: bool, field: &str, reason: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, reason))
    }
}

impl DemandParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.base.is_finite() && self.base >= 0.0, "demand.base", "must be >= 0")?;
        check(
            self.daily_amplitude.is_finite() && self.daily_amplitude >= 0.0,
            "demand.daily_amplitude",
            "must be >= 0",
        )?;
        check(
            self.seasonal_amplitude.is_finite() && self.seasonal_amplitude >= 0.0,
            "demand.seasonal_amplitude",
            "must be >= 0",
        )?;
        check(self.daily_peak_hour.is_finite(), "demand.daily_peak_hour", "must be finite")?;
        check(
            self.noise_sd.is_finite() && self.noise_sd >= 0.0,
            "demand.noise_sd",
            "must be >= 0",
        )
    }

    /// Largest noise-free demand the profile can produce.
    pub fn nominal_peak(&self) -> f64 {
        self.base + self.daily_amplitude + self.seasonal_amplitude
    }
}

impl SolarParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.peak.is_finite() && self.peak >= 0.0, "solar.peak", "must be >= 0")?;
        check(
            self.sunrise_hour >= 0.0
                && self.sunrise_hour < self.sunset_hour
                && self.sunset_hour <= 24.0,
            "solar.sunrise_hour",
            "need 0 <= sunrise_hour < sunset_hour <= 24",
        )?;
        check(
            self.noise_factor_sd.is_finite() && self.noise_factor_sd >= 0.0,
            "solar.noise_factor_sd",
            "must be >= 0",
        )
    }
}

impl WindParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.scale.is_finite() && self.scale > 0.0, "wind.scale", "must be > 0")?;
        check(self.shape.is_finite() && self.shape > 0.0, "wind.shape", "must be > 0")?;
        check(self.cap.is_finite() && self.cap > 0.0, "wind.cap", "must be > 0")
    }
}

/// Noise-free demand at `hour` on `day_of_year` (may be negative for odd parameters).
pub fn demand_mean(hour: f64, day_of_year: u32, p: &DemandParams) -> f64 {
    let daily = (2.0 * PI * (hour - p.daily_peak_hour) / 24.0).cos();
    let seasonal = (2.0 * PI * f64::from(day_of_year) / 365.0).cos();
    p.base + p.daily_amplitude * daily + p.seasonal_amplitude * seasonal
}

/// Demand sample in MW, floored at zero.
pub fn demand_at(hour: f64, day_of_year: u32, p: &DemandParams, rng: &mut SimRng) -> f64 {
    let noise = rng.normal(p.noise_sd);
    (demand_mean(hour, day_of_year, p) + noise).max(0.0)
}

/// Noise-free solar availability.
pub fn solar_clear_sky(hour: f64, p: &SolarParams) -> f64 {
    if hour < p.sunrise_hour || hour > p.sunset_hour {
        return 0.0;
    }
    let phase = PI * (hour - p.sunrise_hour) / (p.sunset_hour - p.sunrise_hour);
    (p.peak * phase.sin()).max(0.0)
}

/// Solar sample in MW. One normal variate is consumed at every hour, day or night,
/// so the stream stays aligned across hours.
pub fn solar_at(hour: f64, p: &SolarParams, rng: &mut SimRng) -> f64 {
    let factor = (1.0 + rng.normal(p.noise_factor_sd)).max(0.0);
    let upper = p.peak * (1.0 + 3.0 * p.noise_factor_sd);
    (solar_clear_sky(hour, p) * factor).clamp(0.0, upper)
}

/// Inverse-CDF Weibull draw for a given uniform `u` in `[0, 1)`, capped at `cap`.
pub fn wind_from_uniform(u: f64, p: &WindParams) -> f64 {
    let raw = p.scale * (-(1.0 - u).ln()).powf(1.0 / p.shape);
    raw.min(p.cap).max(0.0)
}

/// Wind availability sample in MW.
pub fn wind_at(p: &WindParams, rng: &mut SimRng) -> f64 {
    let u = rng.uniform();
    wind_from_uniform(u, p)
}
