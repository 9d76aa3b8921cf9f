use serde::{Deserialize, Serialize};

use crate::grid::{GridConfig, GridState};

/// Normalization constants for [`featurize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScales {
    /// Nominal peak demand (`base + daily_amplitude + seasonal_amplitude`).
    pub demand: f64,
    /// Solar peak.
    pub solar: f64,
    /// Wind cap.
    pub wind: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub steps_per_episode: usize,
    /// `p_max` of each generator.
    pub gen_max: Vec<f64>,
}

impl FeatureScales {
    pub fn from_config(config: &GridConfig) -> Self {
        let positive = |v: f64| if v > 0.0 { v } else { 1.0 };
        Self {
            demand: positive(config.demand.nominal_peak()),
            solar: positive(config.solar.peak),
            wind: positive(config.wind.cap),
            soc_min: config.storage.soc_min,
            soc_max: config.storage.soc_max,
            steps_per_episode: config.steps_per_episode,
            gen_max: config.generators.iter().map(|g| positive(g.p_max)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        5 + self.gen_max.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `[hour fraction, demand, solar, wind, SoC fraction, generator output fractions...]`.
    pub fn apply(&self, state: &GridState) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.len());
        f.push(state.step as f64 / self.steps_per_episode as f64);
        f.push(state.demand / self.demand);
        f.push(state.solar_avail / self.solar);
        f.push(state.wind_avail / self.wind);
        f.push((state.soc - self.soc_min) / (self.soc_max - self.soc_min));
        f.extend(state.gen_output.iter().zip(&self.gen_max).map(|(p, m)| p / m));
        f
    }
}

/// Normalized feature vector of `state` under `config`'s scales.
pub fn featurize(state: &GridState, config: &GridConfig) -> Vec<f64> {
    FeatureScales::from_config(config).apply(state)
}
