//! The grid scheduling environment: feasibility projection, power balance,
//! operating costs and the per-step transition of a simulated day.

mod config;
mod env;
mod physics;
mod state;

pub use config::{ConfigError, GeneratorParams, GridConfig, StorageParams};
pub use env::{reset, sample_exogenous, step, EnvError, GridEnv};
pub use physics::{
    clamp_action, fuel_cost, power_balance, setpoint_bounds, storage_limits, update_soc, Balance,
};
pub use state::{GridAction, GridState, RewardBreakdown, TransitionResult};
