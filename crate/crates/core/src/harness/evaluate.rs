use serde::{Deserialize, Serialize};

use super::policy::GridPolicy;
use crate::grid::{self, ConfigError, EnvError, GridConfig};
use crate::parallel::{map_indexed, Execution};
use crate::stochastic::make_rng;

/// Shed or surplus energy below this (MWh per step) is not counted as an event.
pub const IMBALANCE_TOLERANCE_MWH: f64 = 1e-6;

/// Aggregate evaluation metrics. Costs are in $ summed over every evaluated
/// episode (one simulated day each); energies in MWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub agent: String,
    pub episodes: usize,
    pub steps: usize,
    pub total_cost: f64,
    pub mean_episode_cost: f64,
    /// Mean daily cost extrapolated to 30 days.
    pub monthly_cost_estimate: f64,
    pub fuel_cost: f64,
    pub startup_cost: f64,
    pub penalty_cost: f64,
    /// Percent of demand energy served by renewables; 0 when no demand occurred.
    pub renewable_utilization: f64,
    /// False when total demand was zero and the utilization is undefined.
    pub utilization_defined: bool,
    pub imbalance_events: usize,
    pub shed_events: usize,
    pub shed_mwh_total: f64,
    pub surplus_mwh_total: f64,
    pub curtailed_mwh_total: f64,
    pub renewable_used_mwh_total: f64,
    pub demand_mwh_total: f64,
    pub mean_episode_reward: f64,
    pub convergence_episode: Option<usize>,
}

/// One evaluated step, as written to `trajectory.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub day: u32,
    pub demand: f64,
    pub solar: f64,
    pub wind: f64,
    pub soc: f64,
    pub thermal: f64,
    pub storage_power: f64,
    pub renewable_used_mwh: f64,
    pub curtailed_mwh: f64,
    pub shed_mwh: f64,
    pub surplus_mwh: f64,
    pub demand_mwh: f64,
    pub fuel_cost: f64,
    pub startup_cost: f64,
    pub penalty_cost: f64,
    pub reward: f64,
}

impl StepRecord {
    pub fn cost(&self) -> f64 {
        self.fuel_cost + self.startup_cost + self.penalty_cost
    }
}

const TRAJECTORY_HEADER: &str = "episode,step,day,demand,solar,wind,soc,thermal,storage_power,renewable_used_mwh,\
curtailed_mwh,shed_mwh,surplus_mwh,demand_mwh,fuel_cost,startup_cost,penalty_cost,reward\n";

pub fn trajectory_csv(records: &[StepRecord]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.episode,
            r.step,
            r.day,
            r.demand,
            r.solar,
            r.wind,
            r.soc,
            r.thermal,
            r.storage_power,
            r.renewable_used_mwh,
            r.curtailed_mwh,
            r.shed_mwh,
            r.surplus_mwh,
            r.demand_mwh,
            r.fuel_cost,
            r.startup_cost,
            r.penalty_cost,
            r.reward
        ));
    }
    out
}

/// Run `policy` for `n_episodes` seeded days and aggregate the metrics.
///
/// Episode `k` draws its day of year and exogenous noise from
/// `make_rng(seed).split("evaluation").split_index(k)`; stochastic policies
/// draw from a separate per-episode stream. These labels never occur in
/// training, so evaluation noise is disjoint from exploration noise.
pub fn evaluate<P: GridPolicy + ?Sized>(
    policy: &P,
    config: &GridConfig,
    n_episodes: usize,
    seed: u64,
) -> Result<MetricsReport, EnvError> {
    evaluate_with_trajectory(policy, config, n_episodes, seed, Execution::Parallel).map(|(r, _)| r)
}

/// [`evaluate`] with an explicit execution mode, also returning every step.
/// Both modes give bit-identical results.
pub fn evaluate_with_trajectory<P: GridPolicy + ?Sized>(
    policy: &P,
    config: &GridConfig,
    n_episodes: usize,
    seed: u64,
    mode: Execution,
) -> Result<(MetricsReport, Vec<StepRecord>), EnvError> {
    config.validate()?;
    if n_episodes == 0 {
        return Err(ConfigError::invalid("experiment.eval_episodes", "must be >= 1").into());
    }
    policy.check_compatible(config)?;

    let episodes = map_indexed(n_episodes, mode, |k| run_episode(policy, config, seed, k));
    let mut records = Vec::with_capacity(n_episodes * config.steps_per_episode);
    for ep in episodes {
        records.extend(ep?);
    }
    let report = aggregate(policy.kind().name(), n_episodes, &records);
    Ok((report, records))
}

fn run_episode<P: GridPolicy + ?Sized>(
    policy: &P,
    config: &GridConfig,
    seed: u64,
    k: usize,
) -> Result<Vec<StepRecord>, EnvError> {
    let root = make_rng(seed).split("evaluation");
    let mut env_rng = root.split_index(k as u64);
    let mut policy_rng = root.split("policy").split_index(k as u64);
    let day = env_rng.index(365) as u32;
    let mut state = grid::reset(config, day, &mut env_rng)?;
    let mut records = Vec::with_capacity(config.steps_per_episode);
    while state.step < config.steps_per_episode {
        let action = policy.act(&state, config, &mut policy_rng);
        let result = grid::step(&state, &action, config, &mut env_rng)?;
        let b = &result.breakdown;
        records.push(StepRecord {
            episode: k,
            step: state.step,
            day,
            demand: state.demand,
            solar: state.solar_avail,
            wind: state.wind_avail,
            soc: state.soc,
            thermal: result.applied_action.thermal(),
            storage_power: result.applied_action.storage_power,
            renewable_used_mwh: b.renewable_used_mwh,
            curtailed_mwh: b.curtailed_mwh,
            shed_mwh: b.shed_mwh,
            surplus_mwh: b.surplus_mwh,
            demand_mwh: b.demand_mwh,
            fuel_cost: b.fuel_cost,
            startup_cost: b.startup_cost,
            penalty_cost: b.shed_penalty + b.imbalance_penalty + b.curtail_penalty,
            reward: b.reward,
        });
        state = result.next_state;
    }
    Ok(records)
}

fn aggregate(agent: &str, episodes: usize, records: &[StepRecord]) -> MetricsReport {
    let sum = |f: fn(&StepRecord) -> f64| records.iter().map(f).sum::<f64>();
    let fuel_cost = sum(|r| r.fuel_cost);
    let startup_cost = sum(|r| r.startup_cost);
    let penalty_cost = sum(|r| r.penalty_cost);
    let total_cost = sum(|r| r.cost());
    let demand = sum(|r| r.demand_mwh);
    let used = sum(|r| r.renewable_used_mwh);
    let utilization_defined = demand > 0.0;
    let renewable_utilization = if utilization_defined {
        (100.0 * used / demand).clamp(0.0, 100.0)
    } else {
        0.0
    };
    let mean_episode_cost = total_cost / episodes as f64;
    MetricsReport {
        agent: agent.to_string(),
        episodes,
        steps: records.len(),
        total_cost,
        mean_episode_cost,
        monthly_cost_estimate: 30.0 * mean_episode_cost,
        fuel_cost,
        startup_cost,
        penalty_cost,
        renewable_utilization,
        utilization_defined,
        imbalance_events: records
            .iter()
            .filter(|r| r.shed_mwh > IMBALANCE_TOLERANCE_MWH || r.surplus_mwh > IMBALANCE_TOLERANCE_MWH)
            .count(),
        shed_events: records.iter().filter(|r| r.shed_mwh > IMBALANCE_TOLERANCE_MWH).count(),
        shed_mwh_total: sum(|r| r.shed_mwh),
        surplus_mwh_total: sum(|r| r.surplus_mwh),
        curtailed_mwh_total: sum(|r| r.curtailed_mwh),
        renewable_used_mwh_total: used,
        demand_mwh_total: demand,
        mean_episode_reward: sum(|r| r.reward) / episodes as f64,
        convergence_episode: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridAction, GridState};
    use crate::harness::{PriorityListPolicy, RandomPolicy};
    use crate::stochastic::{DemandParams, SimRng, WindParams};
    use crate::tabular::action_templates;

    struct AllOff;

    impl GridPolicy for AllOff {
        fn kind(&self) -> crate::harness::AgentKind {
            crate::harness::AgentKind::PriorityList
        }

        fn act(&self, state: &GridState, _config: &GridConfig, _rng: &mut SimRng) -> GridAction {
            GridAction {
                gen_setpoint: vec![0.0; state.gen_output.len()],
                gen_commit: vec![false; state.gen_output.len()],
                storage_power: 0.0,
            }
        }

        fn check_compatible(&self, _config: &GridConfig) -> Result<(), ConfigError> {
            Ok(())
        }
    }

    fn flat_demand(config: &mut GridConfig, level: f64) {
        config.demand = DemandParams {
            base: level,
            daily_amplitude: 0.0,
            daily_peak_hour: 0.0,
            seasonal_amplitude: 0.0,
            noise_sd: 0.0,
        };
    }

    #[test]
    fn zero_demand_costs_only_minimum_output_fuel() {
        let mut config = GridConfig::small_grid();
        flat_demand(&mut config, 0.0);
        config.penalty_imbalance = 0.0;
        let report = evaluate(&PriorityListPolicy, &config, 3, 11).unwrap();
        let per_step: f64 = config
            .generators
            .iter()
            .map(|g| g.fuel_a + g.fuel_b * g.p_min + g.fuel_c * g.p_min * g.p_min)
            .sum::<f64>()
            * config.dt_hours();
        let expected = per_step * (3 * config.steps_per_episode) as f64;
        assert!((report.total_cost - expected).abs() < 1e-6 * expected);
        assert!(!report.utilization_defined);
        assert_eq!(report.renewable_utilization, 0.0);
        assert_eq!(report.shed_events, 0);
    }

    #[test]
    fn renewables_covering_all_demand_give_full_utilization() {
        let mut config = GridConfig::small_grid();
        flat_demand(&mut config, 5.0);
        // Shape 50 keeps every wind draw above 19 MW.
        config.wind = WindParams {
            scale: 40.0,
            shape: 50.0,
            cap: 40.0,
        };
        let report = evaluate(&AllOff, &config, 4, 2).unwrap();
        assert!(report.utilization_defined);
        assert!((report.renewable_utilization - 100.0).abs() < 1e-9);
        assert_eq!(report.shed_events, 0);
        assert_eq!(report.imbalance_events, 0);
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let config = GridConfig::small_grid();
        let random = RandomPolicy {
            templates: action_templates(&config, 0.1),
        };
        let a = evaluate_with_trajectory(&random, &config, 6, 5, Execution::Sequential).unwrap();
        let b = evaluate_with_trajectory(&random, &config, 6, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(evaluate(&random, &config, 6, 5).unwrap(), a.0);
        assert_ne!(evaluate(&random, &config, 6, 6).unwrap(), a.0);
    }

    #[test]
    fn report_matches_trajectory() {
        let config = GridConfig::small_grid();
        let (report, records) =
            evaluate_with_trajectory(&PriorityListPolicy, &config, 5, 9, Execution::Parallel).unwrap();
        assert_eq!(records.len(), 5 * config.steps_per_episode);
        let used: f64 = records.iter().map(|r| r.renewable_used_mwh).sum();
        let demand: f64 = records.iter().map(|r| r.demand_mwh).sum();
        assert!((100.0 * used / demand - report.renewable_utilization).abs() < 1e-9);
        assert!(report.renewable_utilization >= 0.0 && report.renewable_utilization <= 100.0);
        let csv = trajectory_csv(&records);
        assert_eq!(csv.lines().count(), records.len() + 1);
    }

    #[test]
    fn zero_episodes_is_a_config_error() {
        let config = GridConfig::small_grid();
        assert!(evaluate(&PriorityListPolicy, &config, 0, 1).is_err());
    }
}
