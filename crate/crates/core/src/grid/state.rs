use serde::{Deserialize, Serialize};

/// Observable condition of the grid at the start of a step. `demand`,
/// `solar_avail` and `wind_avail` are the values the next action is balanced
/// against; `gen_output` and `soc` are carried over from the previous step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub step: usize,
    pub day_of_year: u32,
    pub demand: f64,
    pub solar_avail: f64,
    pub wind_avail: f64,
    pub gen_output: Vec<f64>,
    pub gen_on: Vec<bool>,
    pub soc: f64,
}

impl GridState {
    pub fn renewable_avail(&self) -> f64 {
        self.solar_avail + self.wind_avail
    }

    pub fn thermal_output(&self) -> f64 {
        self.gen_output.iter().sum()
    }
}

/// Setpoints and commitments for every generator, plus signed storage power
/// (positive discharges to the bus, negative charges from it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAction {
    pub gen_setpoint: Vec<f64>,
    pub gen_commit: Vec<bool>,
    pub storage_power: f64,
}

impl GridAction {
    pub fn discharge(&self) -> f64 {
        self.storage_power.max(0.0)
    }

    pub fn charge(&self) -> f64 {
        (-self.storage_power).max(0.0)
    }

    pub fn thermal(&self) -> f64 {
        self.gen_setpoint.iter().sum()
    }
}

/// Itemized costs for one step. `reward` is the negated sum of the five cost fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub fuel_cost: f64,
    pub startup_cost: f64,
    pub shed_penalty: f64,
    pub imbalance_penalty: f64,
    pub curtail_penalty: f64,
    pub shed_mwh: f64,
    pub curtailed_mwh: f64,
    pub renewable_used_mwh: f64,
    /// Over-generation energy charged to `imbalance_penalty`.
    pub surplus_mwh: f64,
    pub demand_mwh: f64,
    pub reward: f64,
}

impl RewardBreakdown {
    pub fn total_cost(&self) -> f64 {
        self.fuel_cost + self.startup_cost + self.shed_penalty + self.imbalance_penalty + self.curtail_penalty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionResult {
    pub next_state: GridState,
    pub breakdown: RewardBreakdown,
    pub applied_action: GridAction,
    pub done: bool,
}
