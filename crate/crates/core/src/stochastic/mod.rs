//! Seeded exogenous drivers: load demand, solar and wind availability.

mod profiles;
mod rng;

pub use profiles::{
    demand_at, demand_mean, solar_at, solar_clear_sky, wind_at, wind_from_uniform, DemandParams,
    SolarParams, WindParams,
};
pub use rng::{make_rng, split, SimRng};
