use super::{GeneratorParams, GridAction, GridConfig, GridState, StorageParams};

/// Feasible storage power interval `(max_charge, max_discharge)`, both as
/// non-negative magnitudes, for the current state of charge.
pub fn storage_limits(soc: f64, storage: &StorageParams, dt: f64) -> (f64, f64) {
    let headroom = (storage.soc_max - soc).max(0.0);
    let available = (soc - storage.soc_min).max(0.0);
    let charge = storage.max_charge.min(headroom / (storage.eff_charge * dt));
    let discharge = storage.max_discharge.min(available * storage.eff_discharge / dt);
    (charge.max(0.0), discharge.max(0.0))
}

/// State of charge after applying `storage_power` for `dt` hours.
pub fn update_soc(soc: f64, storage_power: f64, storage: &StorageParams, dt: f64) -> f64 {
    let next = if storage_power > 0.0 {
        soc - storage_power * dt / storage.eff_discharge
    } else {
        soc + (-storage_power) * dt * storage.eff_charge
    };
    next.clamp(storage.soc_min, storage.soc_max)
}

/// Project an action onto the feasible set: ramp-limited generator setpoints,
/// zero output for decommitted units, and storage power that keeps the SoC
/// inside its band. Non-finite requests fall back to the nearest feasible hold.
pub fn clamp_action(state: &GridState, action: &GridAction, config: &GridConfig) -> GridAction {
    let gen_setpoint = config
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            if !action.gen_commit[i] {
                return 0.0;
            }
            let (lo, hi) = setpoint_bounds(g, state.gen_on[i], state.gen_output[i]);
            let requested = action.gen_setpoint[i];
            let requested = if requested.is_finite() {
                requested
            } else {
                state.gen_output[i]
            };
            requested.clamp(lo, hi)
        })
        .collect();

    let (max_ch, max_dis) = storage_limits(state.soc, &config.storage, config.dt_hours());
    let storage_power = if action.storage_power.is_finite() {
        action.storage_power.clamp(-max_ch, max_dis)
    } else {
        0.0
    };

    GridAction {
        gen_setpoint,
        gen_commit: action.gen_commit.clone(),
        storage_power,
    }
}

/// Output interval for a committed unit. A unit starting up may go anywhere in
/// `[p_min, max(p_min, ramp)]`.
pub fn setpoint_bounds(g: &GeneratorParams, was_on: bool, prev: f64) -> (f64, f64) {
    if was_on {
        (g.p_min.max(prev - g.ramp_limit), g.p_max.min(prev + g.ramp_limit))
    } else {
        (g.p_min, g.p_max.min(g.p_min.max(g.ramp_limit)))
    }
}

/// Result of the fixed merit-order balance for one step (all in MW).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balance {
    pub renewable_used: f64,
    pub curtailed: f64,
    pub shed: f64,
    /// Thermal plus discharge in excess of demand plus charge.
    pub surplus: f64,
}

/// Thermal output and storage discharge are taken as dispatched; renewables
/// fill what remains of demand plus charging; leftover renewables are
/// curtailed and any remaining deficit is shed.
///
/// `thermal + renewable_used + discharge + shed = demand + charge + surplus`
/// and `renewable_used + curtailed = solar + wind`.
pub fn power_balance(state: &GridState, applied: &GridAction, _config: &GridConfig) -> Balance {
    let available = state.renewable_avail();
    let need = state.demand + applied.charge() - applied.thermal() - applied.discharge();
    if need >= 0.0 {
        let renewable_used = available.min(need);
        Balance {
            renewable_used,
            curtailed: available - renewable_used,
            shed: need - renewable_used,
            surplus: 0.0,
        }
    } else {
        Balance {
            renewable_used: 0.0,
            curtailed: available,
            shed: 0.0,
            surplus: -need,
        }
    }
}

/// Fuel cost in $ for running at `output` for `dt` hours; zero when the unit produces nothing.
pub fn fuel_cost(output: f64, params: &GeneratorParams, dt: f64) -> f64 {
    if output == 0.0 {
        return 0.0;
    }
    dt * (params.fuel_a + params.fuel_b * output + params.fuel_c * output * output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;

    fn one_gen_config() -> GridConfig {
        let mut c = GridConfig::small_grid();
        c.generators.truncate(1);
        c.generators[0] = GeneratorParams {
            p_min: 10.0,
            p_max: 80.0,
            ramp_limit: 10.0,
            fuel_a: 10.0,
            fuel_b: 2.0,
            fuel_c: 0.01,
            startup_cost: 100.0,
        };
        c.storage.max_charge = 20.0;
        c
    }

    fn state(output: f64, soc: f64) -> GridState {
        GridState {
            step: 0,
            day_of_year: 0,
            demand: 100.0,
            solar_avail: 0.0,
            wind_avail: 0.0,
            gen_output: vec![output],
            gen_on: vec![true],
            soc,
        }
    }

    fn action(sp: f64, storage: f64) -> GridAction {
        GridAction {
            gen_setpoint: vec![sp],
            gen_commit: vec![true],
            storage_power: storage,
        }
    }

    #[test]
    fn ramp_and_capacity_clamp() {
        let c = one_gen_config();
        let a = clamp_action(&state(50.0, 50.0), &action(100.0, 0.0), &c);
        assert_eq!(a.gen_setpoint[0], 60.0);
        let s = state(75.0, 50.0);
        assert_eq!(clamp_action(&s, &action(100.0, 0.0), &c).gen_setpoint[0], 80.0);
    }

    #[test]
    fn storage_request_is_limited() {
        let c = one_gen_config();
        let a = clamp_action(&state(50.0, 50.0), &action(50.0, -999.0), &c);
        assert_eq!(a.storage_power, -20.0);
        // 5 MWh of headroom at 95% charge efficiency.
        let near_full = clamp_action(&state(50.0, 85.0), &action(50.0, -999.0), &c);
        assert!((near_full.storage_power + 5.0 / 0.95).abs() < 1e-12);
        let empty = clamp_action(&state(50.0, c.storage.soc_min), &action(50.0, 999.0), &c);
        assert_eq!(empty.storage_power, 0.0);
    }

    #[test]
    fn feasible_action_unchanged() {
        let c = one_gen_config();
        let a = action(55.0, 3.0);
        assert_eq!(clamp_action(&state(50.0, 50.0), &a, &c), a);
    }

    #[test]
    fn decommit_and_startup() {
        let c = one_gen_config();
        let off = GridAction {
            gen_setpoint: vec![40.0],
            gen_commit: vec![false],
            storage_power: 0.0,
        };
        assert_eq!(clamp_action(&state(50.0, 50.0), &off, &c).gen_setpoint[0], 0.0);

        let mut cold = state(0.0, 50.0);
        cold.gen_on[0] = false;
        let start = clamp_action(&cold, &action(0.0, 0.0), &c);
        assert_eq!(start.gen_setpoint[0], 10.0);
        let start_high = clamp_action(&cold, &action(70.0, 0.0), &c);
        assert_eq!(start_high.gen_setpoint[0], 10.0);
    }

    #[test]
    fn non_finite_requests_are_held() {
        let c = one_gen_config();
        let a = clamp_action(&state(50.0, 50.0), &action(f64::NAN, f64::INFINITY), &c);
        assert_eq!(a.gen_setpoint[0], 50.0);
        assert_eq!(a.storage_power, 0.0);
    }

    #[test]
    fn merit_order_examples() {
        let c = one_gen_config();
        let mut s = state(60.0, 50.0);
        s.solar_avail = 30.0;
        s.wind_avail = 20.0;
        let b = power_balance(&s, &action(60.0, 10.0), &c);
        assert_eq!((b.renewable_used, b.curtailed, b.shed), (30.0, 20.0, 0.0));

        let mut s = state(40.0, 50.0);
        s.wind_avail = 20.0;
        let b = power_balance(&s, &action(40.0, 0.0), &c);
        assert_eq!((b.renewable_used, b.curtailed, b.shed), (20.0, 0.0, 40.0));

        let s = state(100.0, 50.0);
        let b = power_balance(&s, &action(100.0, 0.0), &c);
        assert_eq!((b.renewable_used, b.curtailed, b.shed, b.surplus), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn over_generation_is_surplus() {
        let c = one_gen_config();
        let mut s = state(60.0, 50.0);
        s.demand = 50.0;
        s.wind_avail = 5.0;
        let b = power_balance(&s, &action(60.0, 0.0), &c);
        assert_eq!((b.renewable_used, b.curtailed, b.shed, b.surplus), (0.0, 5.0, 0.0, 10.0));
    }

    #[test]
    fn fuel_cost_examples() {
        let g = one_gen_config().generators[0].clone();
        assert_eq!(fuel_cost(0.0, &g, 1.0), 0.0);
        assert!((fuel_cost(50.0, &g, 1.0) - 135.0).abs() < 1e-12);
        let doubled = GeneratorParams {
            fuel_b: 4.0,
            ..g
        };
        assert!((fuel_cost(50.0, &doubled, 1.0) - 235.0).abs() < 1e-12);
    }

    #[test]
    fn storage_round_trip_loses_both_efficiencies() {
        let mut c = one_gen_config();
        c.storage.eff_charge = 0.9;
        c.storage.eff_discharge = 0.8;
        let dt = 1.0;
        let energy = 12.0;
        let soc0 = 30.0;
        let soc1 = update_soc(soc0, -energy / dt, &c.storage, dt);
        let stored = soc1 - soc0;
        let (_, max_dis) = storage_limits(soc0 + stored, &c.storage, dt);
        let deliverable = stored * c.storage.eff_discharge;
        assert!(deliverable <= max_dis + 1e-12);
        let soc2 = update_soc(soc1, deliverable / dt, &c.storage, dt);
        assert!((soc2 - soc0).abs() < 1e-9);
        assert!((deliverable - 0.9 * 0.8 * energy).abs() < 1e-9);
    }
}
