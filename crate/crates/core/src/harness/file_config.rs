use serde::{Deserialize, Serialize};

use super::policy::AgentKind;
use crate::deep::{AcHyper, DqnHyper};
use crate::grid::{ConfigError, GeneratorParams, GridConfig, StorageParams};
use crate::stochastic::{DemandParams, SolarParams, WindParams};
use crate::tabular::{action_templates, ActionTemplate, AlphaSchedule, DiscretizationScheme, SchemeError, TabularHyper};

/// Top-level TOML experiment file. Every section and key is optional and
/// falls back to the small reference grid; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub grid: GridSection,
    pub demand: DemandParams,
    pub solar: SolarParams,
    pub wind: WindParams,
    pub penalties: PenaltiesSection,
    pub agent: AgentSections,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
    /// Agents trained by `train` when no `--agent` is given.
    pub agents: Vec<AgentKind>,
    pub eval_episodes: usize,
    pub convergence_window: usize,
    pub convergence_band: f64,
    /// Generator step per action template, as a fraction of `p_max`.
    pub action_delta: f64,
    /// Run evaluation episodes and independent agents on the thread pool.
    pub parallel: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seed: 0,
            agents: vec![AgentKind::Qlearning, AgentKind::Dqn, AgentKind::ActorCritic],
            eval_episodes: 50,
            convergence_window: 5,
            convergence_band: 0.05,
            action_delta: 0.1,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub steps_per_episode: usize,
    pub generators: Vec<GeneratorParams>,
    pub storage: StorageParams,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridConfig::small_grid();
        Self {
            steps_per_episode: g.steps_per_episode,
            generators: g.generators,
            storage: g.storage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltiesSection {
    pub shed: f64,
    pub imbalance: f64,
    pub curtail: f64,
}

impl Default for PenaltiesSection {
    fn default() -> Self {
        let g = GridConfig::small_grid();
        Self {
            shed: g.penalty_shed,
            imbalance: g.penalty_imbalance,
            curtail: g.penalty_curtail,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSections {
    pub qlearning: QLearningSection,
    pub dqn: DqnHyper,
    pub actor_critic: ActorCriticSection,
}

pub type ActorCriticSection = AcHyper;
pub type DqnSection = DqnHyper;

/// Q-learning hyperparameters plus the state discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningSection {
    pub alpha: f64,
    pub alpha_schedule: AlphaSchedule,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_episodes: usize,
    pub episodes: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub reward_scale: f64,
    pub demand_bins: usize,
    pub soc_bins: usize,
    pub renewable_bins: usize,
    pub include_hour: bool,
}

impl Default for QLearningSection {
    fn default() -> Self {
        let h = TabularHyper::default();
        Self {
            alpha: h.alpha,
            alpha_schedule: h.alpha_schedule,
            gamma: h.gamma,
            epsilon_start: h.epsilon_start,
            epsilon_end: h.epsilon_end,
            epsilon_decay_episodes: h.epsilon_decay_episodes,
            episodes: h.episodes,
            eval_every: h.eval_every,
            eval_episodes: h.eval_episodes,
            reward_scale: h.reward_scale,
            demand_bins: 10,
            soc_bins: 5,
            renewable_bins: 5,
            include_hour: true,
        }
    }
}

impl QLearningSection {
    pub fn hyper(&self) -> TabularHyper {
        TabularHyper {
            alpha: self.alpha,
            alpha_schedule: self.alpha_schedule,
            gamma: self.gamma,
            epsilon_start: self.epsilon_start,
            epsilon_end: self.epsilon_end,
            epsilon_decay_episodes: self.epsilon_decay_episodes,
            episodes: self.episodes,
            eval_every: self.eval_every,
            eval_episodes: self.eval_episodes,
            reward_scale: self.reward_scale,
        }
    }
}

impl ExperimentConfig {
    /// Parse TOML text. Errors carry line and column information.
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config is always representable as TOML")
    }

    pub fn grid_config(&self) -> GridConfig {
        GridConfig {
            generators: self.grid.generators.clone(),
            storage: self.grid.storage.clone(),
            demand: self.demand.clone(),
            solar: self.solar.clone(),
            wind: self.wind.clone(),
            steps_per_episode: self.grid.steps_per_episode,
            penalty_shed: self.penalties.shed,
            penalty_imbalance: self.penalties.imbalance,
            penalty_curtail: self.penalties.curtail,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid_config().validate()?;
        let e = &self.experiment;
        if e.eval_episodes == 0 {
            return Err(ConfigError::invalid("experiment.eval_episodes", "must be >= 1"));
        }
        if e.convergence_window < 2 {
            return Err(ConfigError::invalid("experiment.convergence_window", "must be >= 2"));
        }
        if !(e.convergence_band.is_finite() && e.convergence_band > 0.0) {
            return Err(ConfigError::invalid("experiment.convergence_band", "must be > 0"));
        }
        if !(e.action_delta > 0.0 && e.action_delta <= 1.0) {
            return Err(ConfigError::invalid("experiment.action_delta", "must lie in (0, 1]"));
        }
        let q = &self.agent.qlearning;
        for (field, v) in [
            ("demand_bins", q.demand_bins),
            ("soc_bins", q.soc_bins),
            ("renewable_bins", q.renewable_bins),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(format!("agent.qlearning.{field}"), "must be >= 1"));
            }
        }
        q.hyper().validate()?;
        self.agent.dqn.validate()?;
        self.agent.actor_critic.validate()
    }

    pub fn templates(&self) -> Vec<ActionTemplate> {
        action_templates(&self.grid_config(), self.experiment.action_delta)
    }

    pub fn scheme(&self) -> Result<DiscretizationScheme, SchemeError> {
        let q = &self.agent.qlearning;
        DiscretizationScheme::for_config(
            &self.grid_config(),
            q.demand_bins,
            q.soc_bins,
            q.renewable_bins,
            q.include_hour,
            self.templates(),
        )
    }
}
