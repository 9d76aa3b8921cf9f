use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ActionTemplate;
use crate::grid::{GridConfig, GridState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("{0}: bin edges must be finite and strictly increasing, with at least two edges")]
    Edges(&'static str),
    #[error("action set must be non-empty")]
    EmptyActions,
    #[error("action set contains duplicate templates {0} and {1}")]
    DuplicateAction(usize, usize),
}

/// Contiguous bins `[e_0, e_1), [e_1, e_2), ...`. Values below `e_0` fall in
/// the first bin, values at or above the last edge in the final bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    edges: Vec<f64>,
}

impl Bins {
    pub fn new(edges: Vec<f64>, name: &'static str) -> Result<Self, SchemeError> {
        let ok = edges.len() >= 2 && edges.iter().all(|e| e.is_finite()) && edges.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(Self { edges })
        } else {
            Err(SchemeError::Edges(name))
        }
    }

    /// `count` equal-width bins spanning `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, count: usize, name: &'static str) -> Result<Self, SchemeError> {
        if count == 0 {
            return Err(SchemeError::Edges(name));
        }
        let width = (hi - lo) / count as f64;
        Self::new((0..=count).map(|i| lo + width * i as f64).collect(), name)
    }

    pub fn count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bin(&self, x: f64) -> usize {
        let above = self.edges.partition_point(|&e| e <= x);
        above.saturating_sub(1).min(self.count() - 1)
    }
}

/// Maps grid states to a mixed-radix index over (demand, SoC, renewable, hour)
/// bins and carries the discrete action set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationScheme {
    pub demand: Bins,
    pub soc: Bins,
    pub renewable: Bins,
    /// Number of hour slots (steps per episode) when the hour is part of the state, else `None`.
    pub hours: Option<usize>,
    pub actions: Vec<ActionTemplate>,
}

/// Bin indices of one state.
pub type BinTuple = (usize, usize, usize, usize);

impl DiscretizationScheme {
    pub fn new(
        demand: Bins,
        soc: Bins,
        renewable: Bins,
        hours: Option<usize>,
        actions: Vec<ActionTemplate>,
    ) -> Result<Self, SchemeError> {
        if actions.is_empty() {
            return Err(SchemeError::EmptyActions);
        }
        for i in 0..actions.len() {
            for j in i + 1..actions.len() {
                if actions[i] == actions[j] {
                    return Err(SchemeError::DuplicateAction(i, j));
                }
            }
        }
        Ok(Self {
            demand,
            soc,
            renewable,
            hours: hours.filter(|&h| h > 0),
            actions,
        })
    }

    /// Default bins for `config`: demand over `[0, nominal peak + 3 sd]`, SoC
    /// over its band, renewables over `[0, solar peak + wind cap]`.
    pub fn for_config(
        config: &GridConfig,
        demand_bins: usize,
        soc_bins: usize,
        renewable_bins: usize,
        include_hour: bool,
        actions: Vec<ActionTemplate>,
    ) -> Result<Self, SchemeError> {
        let demand_hi = config.demand.nominal_peak() + 3.0 * config.demand.noise_sd;
        let renewable_hi = (config.solar.peak + config.wind.cap).max(f64::EPSILON);
        Self::new(
            Bins::uniform(0.0, demand_hi, demand_bins, "demand")?,
            Bins::uniform(config.storage.soc_min, config.storage.soc_max, soc_bins, "soc")?,
            Bins::uniform(0.0, renewable_hi, renewable_bins, "renewable")?,
            include_hour.then_some(config.steps_per_episode),
            actions,
        )
    }

    fn radices(&self) -> [usize; 4] {
        [
            self.demand.count(),
            self.soc.count(),
            self.renewable.count(),
            self.hours.unwrap_or(1),
        ]
    }

    pub fn n_states(&self) -> usize {
        self.radices().iter().product()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn bins_of(&self, state: &GridState) -> BinTuple {
        let hour = match self.hours {
            Some(h) => state.step.min(h - 1),
            None => 0,
        };
        (
            self.demand.bin(state.demand),
            self.soc.bin(state.soc),
            self.renewable.bin(state.renewable_avail()),
            hour,
        )
    }

    pub fn encode(&self, t: BinTuple) -> usize {
        let [_, ns, nr, nh] = self.radices();
        ((t.0 * ns + t.1) * nr + t.2) * nh + t.3
    }

    pub fn decode(&self, index: usize) -> BinTuple {
        let [_, ns, nr, nh] = self.radices();
        let h = index % nh;
        let rest = index / nh;
        let r = rest % nr;
        let rest = rest / nr;
        (rest / ns, rest % ns, r, h)
    }

    pub fn discretize(&self, state: &GridState) -> usize {
        self.encode(self.bins_of(state))
    }
}
