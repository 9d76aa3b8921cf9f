//! The grid environment seen through the shared discrete action set, so the
//! same environment drives the tabular and the function-approximation agents.

use crate::deep::FeatureScales;
use crate::grid::{ConfigError, EnvError, GridConfig, GridEnv, GridState};
use crate::mdp::{EnvStep, EpisodicEnv, FeatureEnv, TabularEnv};
use crate::stochastic::SimRng;
use crate::tabular::{ActionTemplate, DiscretizationScheme};

#[derive(Debug, Clone)]
pub struct DiscreteGridEnv {
    env: GridEnv,
    scheme: DiscretizationScheme,
    scales: FeatureScales,
}

impl DiscreteGridEnv {
    pub fn new(config: GridConfig, scheme: DiscretizationScheme) -> Result<Self, ConfigError> {
        let scales = FeatureScales::from_config(&config);
        if scheme.actions.iter().any(|t| t.gen_delta.len() != config.n_generators()) {
            return Err(ConfigError::Dimension(
                "action templates do not match the generator count".into(),
            ));
        }
        let env = GridEnv::new(config, 0, SimRng::new(0))?;
        Ok(Self { env, scheme, scales })
    }

    pub fn config(&self) -> &GridConfig {
        self.env.config()
    }

    pub fn scheme(&self) -> &DiscretizationScheme {
        &self.scheme
    }

    pub fn templates(&self) -> &[ActionTemplate] {
        &self.scheme.actions
    }

    pub fn scales(&self) -> &FeatureScales {
        &self.scales
    }
}

impl EpisodicEnv for DiscreteGridEnv {
    type Obs = GridState;

    fn n_actions(&self) -> usize {
        self.scheme.n_actions()
    }

    /// Draws the day of year from `rng`, then hands the stream to the grid.
    fn reset(&mut self, mut rng: SimRng) -> GridState {
        let day = rng.index(365) as u32;
        self.env.reset(day, rng).clone()
    }

    fn step(&mut self, action: usize) -> Result<EnvStep<GridState>, EnvError> {
        let grid_action = self.scheme.actions[action].to_action(self.env.state(), self.env.config());
        let result = self.env.step(&grid_action)?;
        Ok(EnvStep {
            cost: result.breakdown.total_cost(),
            reward: result.breakdown.reward,
            done: result.done,
            truncated: false,
            obs: result.next_state,
        })
    }
}

impl TabularEnv for DiscreteGridEnv {
    fn n_states(&self) -> usize {
        self.scheme.n_states()
    }

    fn state_index(&self, obs: &GridState) -> usize {
        self.scheme.discretize(obs)
    }
}

impl FeatureEnv for DiscreteGridEnv {
    fn feature_len(&self) -> usize {
        self.scales.len()
    }

    fn features(&self, obs: &GridState) -> Vec<f64> {
        self.scales.apply(obs)
    }
}
