use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stochastic::{DemandParams, SolarParams, WindParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Thermal unit limits and cost curve. Fuel cost per hour is
/// `fuel_a + fuel_b * P + fuel_c * P^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub p_min: f64,
    pub p_max: f64,
    /// MW per step.
    pub ramp_limit: f64,
    pub fuel_a: f64,
    pub fuel_b: f64,
    pub fuel_c: f64,
    pub startup_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageParams {
    /// MWh
    pub capacity: f64,
    /// MW
    pub max_charge: f64,
    /// MW
    pub max_discharge: f64,
    pub eff_charge: f64,
    pub eff_discharge: f64,
    /// MWh
    pub soc_min: f64,
    /// MWh
    pub soc_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub generators: Vec<GeneratorParams>,
    pub storage: StorageParams,
    pub demand: DemandParams,
    pub solar: SolarParams,
    pub wind: WindParams,
    /// Steps per simulated day; each step lasts `24 / steps_per_episode` hours.
    pub steps_per_episode: usize,
    /// $/MWh of unserved demand.
    pub penalty_shed: f64,
    /// $/MWh of over-generation that the bus cannot absorb.
    pub penalty_imbalance: f64,
    /// $/MWh of discarded renewable energy.
    pub penalty_curtail: f64,
}

impl GeneratorParams {
    pub fn validate(&self, index: usize) -> Result<(), ConfigError> {
        let name = |f: &str| format!("generators[{index}].{f}");
        let finite = [
            self.p_min,
            self.p_max,
            self.ramp_limit,
            self.fuel_a,
            self.fuel_b,
            self.fuel_c,
            self.startup_cost,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(ConfigError::invalid(name("*"), "all values must be finite"));
        }
        if !(0.0 <= self.p_min && self.p_min <= self.p_max) {
            return Err(ConfigError::invalid(name("p_min"), "need 0 <= p_min <= p_max"));
        }
        if self.ramp_limit <= 0.0 {
            return Err(ConfigError::invalid(name("ramp_limit"), "must be > 0"));
        }
        if self.fuel_b < 0.0 || self.fuel_c < 0.0 {
            return Err(ConfigError::invalid(name("fuel_b"), "fuel_b and fuel_c must be >= 0"));
        }
        if self.fuel_a < 0.0 {
            return Err(ConfigError::invalid(name("fuel_a"), "must be >= 0"));
        }
        if self.startup_cost < 0.0 {
            return Err(ConfigError::invalid(name("startup_cost"), "must be >= 0"));
        }
        Ok(())
    }

    /// Marginal cost at output `p`, $/MWh.
    pub fn marginal_cost(&self, p: f64) -> f64 {
        self.fuel_b + 2.0 * self.fuel_c * p
    }
}

impl StorageParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let all = [
            self.capacity,
            self.max_charge,
            self.max_discharge,
            self.eff_charge,
            self.eff_discharge,
            self.soc_min,
            self.soc_max,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(ConfigError::invalid("storage", "all values must be finite"));
        }
        if !(0.0 <= self.soc_min && self.soc_min < self.soc_max && self.soc_max <= self.capacity) {
            return Err(ConfigError::invalid(
                "storage.soc_min",
                "need 0 <= soc_min < soc_max <= capacity",
            ));
        }
        if self.max_charge <= 0.0 || self.max_discharge <= 0.0 {
            return Err(ConfigError::invalid(
                "storage.max_charge",
                "charge and discharge limits must be > 0",
            ));
        }
        for (field, eff) in [
            ("storage.eff_charge", self.eff_charge),
            ("storage.eff_discharge", self.eff_discharge),
        ] {
            if !(eff > 0.0 && eff <= 1.0) {
                return Err(ConfigError::invalid(field, "must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

impl Default for StorageParams {
    fn default() -> Self {
        Self {
            capacity: 100.0,
            max_charge: 25.0,
            max_discharge: 25.0,
            eff_charge: 0.95,
            eff_discharge: 0.95,
            soc_min: 10.0,
            soc_max: 90.0,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.generators.is_empty() {
            return Err(ConfigError::invalid("generators", "at least one generator is required"));
        }
        for (i, g) in self.generators.iter().enumerate() {
            g.validate(i)?;
        }
        self.storage.validate()?;
        self.demand.validate()?;
        self.solar.validate()?;
        self.wind.validate()?;
        if self.steps_per_episode == 0 {
            return Err(ConfigError::invalid("steps_per_episode", "must be >= 1"));
        }
        for (field, v) in [
            ("penalty_shed", self.penalty_shed),
            ("penalty_imbalance", self.penalty_imbalance),
            ("penalty_curtail", self.penalty_curtail),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(field, "penalties must be >= 0"));
            }
        }
        Ok(())
    }

    /// Length of one step in hours.
    pub fn dt_hours(&self) -> f64 {
        24.0 / self.steps_per_episode as f64
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    /// Two thermal units (baseload and peaker), one battery, 24 hourly steps.
    pub fn small_grid() -> Self {
        GridConfig {
            generators: vec![
                GeneratorParams {
                    p_min: 50.0,
                    p_max: 100.0,
                    ramp_limit: 30.0,
                    fuel_a: 100.0,
                    fuel_b: 20.0,
                    fuel_c: 0.02,
                    startup_cost: 500.0,
                },
                GeneratorParams {
                    p_min: 20.0,
                    p_max: 60.0,
                    ramp_limit: 20.0,
                    fuel_a: 50.0,
                    fuel_b: 45.0,
                    fuel_c: 0.05,
                    startup_cost: 200.0,
                },
            ],
            storage: StorageParams::default(),
            demand: DemandParams::default(),
            solar: SolarParams::default(),
            wind: WindParams::default(),
            steps_per_episode: 24,
            penalty_shed: 500.0,
            penalty_imbalance: 100.0,
            penalty_curtail: 0.0,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::small_grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_is_valid() {
        GridConfig::small_grid().validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = GridConfig::small_grid();
        c.generators.clear();
        assert!(c.validate().is_err());

        let mut c = GridConfig::small_grid();
        c.generators[0].p_min = 200.0;
        assert!(matches!(c.validate(), Err(ConfigError::Invalid { field, .. }) if field.contains("p_min")));

        let mut c = GridConfig::small_grid();
        c.storage.soc_min = 95.0;
        assert!(c.validate().is_err());

        let mut c = GridConfig::small_grid();
        c.storage.eff_charge = 0.0;
        assert!(c.validate().is_err());

        let mut c = GridConfig::small_grid();
        c.steps_per_episode = 0;
        assert!(c.validate().is_err());

        let mut c = GridConfig::small_grid();
        c.penalty_shed = -1.0;
        assert!(c.validate().is_err());
    }
}
