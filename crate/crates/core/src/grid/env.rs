use thiserror::Error;

use super::physics::{clamp_action, fuel_cost, power_balance, update_soc};
use super::{ConfigError, GridAction, GridConfig, GridState, RewardBreakdown, TransitionResult};
use crate::stochastic::{demand_at, solar_at, wind_at, SimRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("episode already complete at step {0}")]
    EpisodeComplete(usize),
    #[error("action has {got} generator entries, grid has {expected}")]
    ActionShape { expected: usize, got: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Demand, solar and wind for `step`, drawn in that order from `rng`.
pub fn sample_exogenous(step: usize, day_of_year: u32, config: &GridConfig, rng: &mut SimRng) -> (f64, f64, f64) {
    let hour = (step as f64 * config.dt_hours()) % 24.0;
    let demand = demand_at(hour, day_of_year, &config.demand, rng);
    let solar = solar_at(hour, &config.solar, rng);
    let wind = wind_at(&config.wind, rng);
    (demand, solar, wind)
}

/// Start of a simulated day: every unit on at `p_min`, storage at mid-band.
pub fn reset(config: &GridConfig, day_of_year: u32, rng: &mut SimRng) -> Result<GridState, ConfigError> {
    config.validate()?;
    let day_of_year = day_of_year % 365;
    let (demand, solar_avail, wind_avail) = sample_exogenous(0, day_of_year, config, rng);
    Ok(GridState {
        step: 0,
        day_of_year,
        demand,
        solar_avail,
        wind_avail,
        gen_output: config.generators.iter().map(|g| g.p_min).collect(),
        gen_on: vec![true; config.generators.len()],
        soc: 0.5 * (config.storage.soc_min + config.storage.soc_max),
    })
}

/// One sampled transition of the grid.
pub fn step(
    state: &GridState,
    action: &GridAction,
    config: &GridConfig,
    rng: &mut SimRng,
) -> Result<TransitionResult, EnvError> {
    if state.step >= config.steps_per_episode {
        return Err(EnvError::EpisodeComplete(state.step));
    }
    let n = config.n_generators();
    for got in [action.gen_setpoint.len(), action.gen_commit.len(), state.gen_output.len()] {
        if got != n {
            return Err(EnvError::ActionShape { expected: n, got });
        }
    }

    let dt = config.dt_hours();
    let applied = clamp_action(state, action, config);
    let balance = power_balance(state, &applied, config);

    let fuel: f64 = config
        .generators
        .iter()
        .zip(&applied.gen_setpoint)
        .map(|(g, &p)| fuel_cost(p, g, dt))
        .sum();
    let startup: f64 = config
        .generators
        .iter()
        .enumerate()
        .filter(|&(i, _)| !state.gen_on[i] && applied.gen_commit[i])
        .map(|(_, g)| g.startup_cost)
        .sum();

    let mut breakdown = RewardBreakdown {
        fuel_cost: fuel,
        startup_cost: startup,
        shed_penalty: config.penalty_shed * balance.shed * dt,
        imbalance_penalty: config.penalty_imbalance * balance.surplus * dt,
        curtail_penalty: config.penalty_curtail * balance.curtailed * dt,
        shed_mwh: balance.shed * dt,
        curtailed_mwh: balance.curtailed * dt,
        renewable_used_mwh: balance.renewable_used * dt,
        surplus_mwh: balance.surplus * dt,
        demand_mwh: state.demand * dt,
        reward: 0.0,
    };
    breakdown.reward = -breakdown.total_cost();

    let next_step = state.step + 1;
    let (demand, solar_avail, wind_avail) = sample_exogenous(next_step, state.day_of_year, config, rng);
    let next_state = GridState {
        step: next_step,
        day_of_year: state.day_of_year,
        demand,
        solar_avail,
        wind_avail,
        gen_output: applied.gen_setpoint.clone(),
        gen_on: applied.gen_commit.clone(),
        soc: update_soc(state.soc, applied.storage_power, &config.storage, dt),
    };

    Ok(TransitionResult {
        done: next_step == config.steps_per_episode,
        next_state,
        breakdown,
        applied_action: applied,
    })
}

/// Stateful wrapper owning a configuration, the current state and the
/// exogenous random stream.
#[derive(Debug, Clone)]
pub struct GridEnv {
    config: GridConfig,
    state: GridState,
    rng: SimRng,
}

impl GridEnv {
    pub fn new(config: GridConfig, day_of_year: u32, mut rng: SimRng) -> Result<Self, ConfigError> {
        let state = reset(&config, day_of_year, &mut rng)?;
        Ok(Self { config, state, rng })
    }

    pub fn reset(&mut self, day_of_year: u32, rng: SimRng) -> &GridState {
        self.rng = rng;
        self.state = reset(&self.config, day_of_year, &mut self.rng).expect("config validated at construction");
        &self.state
    }

    pub fn step(&mut self, action: &GridAction) -> Result<TransitionResult, EnvError> {
        let result = step(&self.state, action, &self.config, &mut self.rng)?;
        self.state = result.next_state.clone();
        Ok(result)
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.state.step >= self.config.steps_per_episode
    }
}
