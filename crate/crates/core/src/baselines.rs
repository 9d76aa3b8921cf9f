//! Non-learning reference policies: a merit-order dispatch heuristic and a
//! uniform random choice over the action templates.

use crate::grid::{storage_limits, GridAction, GridConfig, GridState};
use crate::stochastic::SimRng;
use crate::tabular::ActionTemplate;

const EPS: f64 = 1e-9;

/// Merit-order dispatch against the current (observed) demand and renewables.
///
/// Units are ranked by marginal cost at their current output. Storage
/// discharges only to cover demand the thermal fleet cannot reach this step
/// and charges only from renewable surplus over minimum thermal output. The
/// thermal target is then met by raising the cheapest units first or lowering
/// the most expensive first, each within its ramp window. All units stay committed.
pub fn priority_list_dispatch(state: &GridState, config: &GridConfig) -> GridAction {
    let n = config.n_generators();
    let bounds: Vec<(f64, f64)> = config
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| crate::grid::setpoint_bounds(g, state.gen_on[i], state.gen_output[i]))
        .collect();
    let lo: f64 = bounds.iter().map(|b| b.0).sum();
    let hi: f64 = bounds.iter().map(|b| b.1).sum();

    let net = state.demand - state.renewable_avail();
    let (max_ch, max_dis) = storage_limits(state.soc, &config.storage, config.dt_hours());
    let storage_power = if net > hi + EPS {
        (net - hi).min(max_dis)
    } else if net < lo - EPS && state.renewable_avail() > EPS {
        -(lo - net).min(state.renewable_avail()).min(max_ch)
    } else {
        0.0
    };
    let target = (net - storage_power).clamp(lo, hi);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ca = config.generators[a].marginal_cost(state.gen_output[a]);
        let cb = config.generators[b].marginal_cost(state.gen_output[b]);
        ca.total_cmp(&cb).then(a.cmp(&b))
    });

    // Start from the current operating point projected into the ramp window.
    let mut setpoint: Vec<f64> = (0..n).map(|i| state.gen_output[i].clamp(bounds[i].0, bounds[i].1)).collect();
    let mut gap = target - setpoint.iter().sum::<f64>();
    if gap > 0.0 {
        for &i in &order {
            let raise = gap.min(bounds[i].1 - setpoint[i]);
            setpoint[i] += raise;
            gap -= raise;
            if gap <= 0.0 {
                break;
            }
        }
    } else if gap < 0.0 {
        for &i in order.iter().rev() {
            let lower = (-gap).min(setpoint[i] - bounds[i].0);
            setpoint[i] -= lower;
            gap += lower;
            if gap >= 0.0 {
                break;
            }
        }
    }

    GridAction {
        gen_setpoint: setpoint,
        gen_commit: vec![true; n],
        storage_power,
    }
}

/// Uniformly random template, instantiated at `state`.
pub fn random_policy(state: &GridState, templates: &[ActionTemplate], config: &GridConfig, rng: &mut SimRng) -> GridAction {
    assert!(!templates.is_empty(), "random policy needs at least one template");
    templates[rng.index(templates.len())].to_action(state, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{clamp_action, power_balance, GeneratorParams};
    use crate::stochastic::make_rng;
    use crate::tabular::action_templates;

    fn state(config: &GridConfig, demand: f64, renewable: f64, outputs: Vec<f64>, soc: f64) -> GridState {
        GridState {
            step: 5,
            day_of_year: 0,
            demand,
            solar_avail: renewable,
            wind_avail: 0.0,
            gen_on: vec![true; config.n_generators()],
            gen_output: outputs,
            soc,
        }
    }

    fn single_unit() -> GridConfig {
        let mut c = GridConfig::small_grid();
        c.generators = vec![GeneratorParams {
            p_min: 10.0,
            p_max: 100.0,
            ramp_limit: 30.0,
            fuel_a: 0.0,
            fuel_b: 20.0,
            fuel_c: 0.0,
            startup_cost: 0.0,
        }];
        c
    }

    #[test]
    fn zero_demand_drives_toward_minimum() {
        let c = GridConfig::small_grid();
        let s = state(&c, 0.0, 0.0, vec![60.0, 40.0], 50.0);
        let a = priority_list_dispatch(&s, &c);
        assert_eq!(a.gen_setpoint, vec![50.0, 20.0]);
        assert_eq!(a.storage_power, 0.0);
    }

    #[test]
    fn single_unit_tracks_net_demand() {
        let c = single_unit();
        let s = state(&c, 70.0, 15.0, vec![40.0], 50.0);
        let a = priority_list_dispatch(&s, &c);
        assert_eq!(a.gen_setpoint, vec![55.0]);
        assert_eq!(a.storage_power, 0.0);
    }

    #[test]
    fn cheapest_unit_raised_first() {
        let c = GridConfig::small_grid();
        let s = state(&c, 110.0, 0.0, vec![60.0, 20.0], 50.0);
        let a = priority_list_dispatch(&s, &c);
        assert_eq!(a.gen_setpoint, vec![90.0, 20.0]);
    }

    #[test]
    fn output_is_already_feasible() {
        let c = GridConfig::small_grid();
        let mut rng = make_rng(77);
        for _ in 0..10_000 {
            let outputs: Vec<f64> = c
                .generators
                .iter()
                .map(|g| g.p_min + rng.uniform() * (g.p_max - g.p_min))
                .collect();
            let soc = c.storage.soc_min + rng.uniform() * (c.storage.soc_max - c.storage.soc_min);
            let s = state(&c, rng.uniform() * 250.0, rng.uniform() * 90.0, outputs, soc);
            let a = priority_list_dispatch(&s, &c);
            assert_eq!(clamp_action(&s, &a, &c), a);
        }
    }

    #[test]
    fn deterministic() {
        let c = GridConfig::small_grid();
        let s = state(&c, 140.0, 20.0, vec![50.0, 20.0], 30.0);
        assert_eq!(priority_list_dispatch(&s, &c), priority_list_dispatch(&s, &c));
    }

    #[test]
    fn no_avoidable_shedding_on_small_grid() {
        let c = single_unit();
        for &demand in &[20.0, 60.0, 95.0] {
            for start in [10.0, 40.0, 70.0, 100.0] {
                for soc in [c.storage.soc_min, 50.0, c.storage.soc_max] {
                    let s = state(&c, demand, 0.0, vec![start], soc);
                    let (_, max_dis) = storage_limits(soc, &c.storage, c.dt_hours());
                    let reach = (start + 30.0).min(100.0) + max_dis;
                    let b = power_balance(&s, &clamp_action(&s, &priority_list_dispatch(&s, &c), &c), &c);
                    if reach >= demand {
                        assert_eq!(b.shed, 0.0, "demand {demand} start {start} soc {soc}");
                    }
                }
            }
        }
    }

    #[test]
    fn random_policy_frequencies() {
        let c = GridConfig::small_grid();
        let templates = action_templates(&c, 0.1);
        let s = state(&c, 100.0, 0.0, vec![50.0, 20.0], 50.0);
        let one = &templates[4..5];
        let mut rng = make_rng(1);
        assert!((0..100).all(|_| random_policy(&s, one, &c, &mut rng) == one[0].to_action(&s, &c)));

        let concrete: Vec<GridAction> = templates.iter().map(|t| t.to_action(&s, &c)).collect();
        let n = 1_000_000;
        let mut counts = vec![0usize; templates.len()];
        let mut rng = make_rng(2);
        for _ in 0..n {
            let a = random_policy(&s, &templates, &c, &mut rng);
            counts[concrete.iter().position(|x| *x == a).unwrap()] += 1;
        }
        let expected = 1.0 / templates.len() as f64;
        for count in counts {
            // Within one percentage point of the uniform frequency.
            assert!((count as f64 / n as f64 - expected).abs() < 0.01);
        }
    }
}
