use serde::{Deserialize, Serialize};

use crate::grid::{GridAction, GridConfig, GridState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StorageMode {
    ChargeFull,
    Idle,
    DischargeFull,
}

impl StorageMode {
    pub const ALL: [StorageMode; 3] = [StorageMode::ChargeFull, StorageMode::Idle, StorageMode::DischargeFull];

    pub fn code(self) -> u8 {
        match self {
            StorageMode::ChargeFull => 0,
            StorageMode::Idle => 1,
            StorageMode::DischargeFull => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code)).copied()
    }
}

/// A discrete decision relative to the current operating point: shift each
/// generator by a fixed MW delta and put storage into one of three modes.
/// Every generator stays committed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionTemplate {
    pub gen_delta: Vec<f64>,
    pub storage: StorageMode,
}

impl ActionTemplate {
    /// Concrete (unclamped) action for `state`.
    pub fn to_action(&self, state: &GridState, config: &GridConfig) -> GridAction {
        let storage_power = match self.storage {
            StorageMode::ChargeFull => -config.storage.max_charge,
            StorageMode::Idle => 0.0,
            StorageMode::DischargeFull => config.storage.max_discharge,
        };
        GridAction {
            gen_setpoint: state
                .gen_output
                .iter()
                .zip(&self.gen_delta)
                .map(|(p, d)| p + d)
                .collect(),
            gen_commit: vec![true; self.gen_delta.len()],
            storage_power,
        }
    }
}

/// All `3^n_gen * 3` templates: each generator moves by `-delta`, `0` or
/// `+delta` (`delta = delta_fraction * p_max`), crossed with the storage modes.
/// Generator 0 varies slowest, storage fastest.
pub fn action_templates(config: &GridConfig, delta_fraction: f64) -> Vec<ActionTemplate> {
    let deltas: Vec<f64> = config.generators.iter().map(|g| delta_fraction * g.p_max).collect();
    let n = deltas.len();
    let combos = 3usize.pow(n as u32);
    let mut out = Vec::with_capacity(combos * 3);
    for code in 0..combos {
        let mut gen_delta = vec![0.0; n];
        let mut rest = code;
        for i in (0..n).rev() {
            gen_delta[i] = match rest % 3 {
                0 => -deltas[i],
                1 => 0.0,
                _ => deltas[i],
            };
            rest /= 3;
        }
        for mode in StorageMode::ALL {
            out.push(ActionTemplate {
                gen_delta: gen_delta.clone(),
                storage: mode,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_count_and_uniqueness() {
        let c = GridConfig::small_grid();
        let t = action_templates(&c, 0.1);
        assert_eq!(t.len(), 27);
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                assert_ne!(t[i], t[j]);
            }
        }
        assert_eq!(t[0].gen_delta, vec![-10.0, -6.0]);
        assert_eq!(t[0].storage, StorageMode::ChargeFull);
        assert_eq!(t[13].gen_delta, vec![0.0, 0.0]);
        assert_eq!(t[13].storage, StorageMode::Idle);
    }
}
