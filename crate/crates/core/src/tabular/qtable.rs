use serde::{Deserialize, Serialize};

use crate::mdp::{greedy_policy, Policy};
use crate::stochastic::SimRng;

/// Dense action-value table with per-pair visit counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
    visits: Vec<u32>,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        assert!(n_states > 0 && n_actions > 0, "empty Q table");
        Self {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions],
            visits: vec![0; n_states * n_actions],
        }
    }

    /// Rebuild from raw parts; `None` when the lengths disagree.
    pub fn from_parts(n_states: usize, n_actions: usize, values: Vec<f64>, visits: Vec<u32>) -> Option<Self> {
        let n = n_states.checked_mul(n_actions)?;
        (n > 0 && values.len() == n && visits.len() == n).then_some(Self {
            n_states,
            n_actions,
            values,
            visits,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn idx(&self, s: usize, a: usize) -> usize {
        assert!(s < self.n_states && a < self.n_actions, "Q index ({s}, {a}) out of range");
        s * self.n_actions + a
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[self.idx(s, a)]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        let i = self.idx(s, a);
        self.values[i] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let start = self.idx(s, 0);
        &self.values[start..start + self.n_actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn visits(&self, s: usize, a: usize) -> u32 {
        self.visits[self.idx(s, a)]
    }

    pub fn visit_counts(&self) -> &[u32] {
        &self.visits
    }

    /// Count a visit to `(s, a)` and return the new count.
    pub fn record_visit(&mut self, s: usize, a: usize) -> u32 {
        let i = self.idx(s, a);
        self.visits[i] = self.visits[i].saturating_add(1);
        self.visits[i]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn best_action(&self, s: usize) -> usize {
        crate::mdp::argmax(self.row(s))
    }

    pub fn greedy_policy(&self) -> Policy {
        let rows: Vec<&[f64]> = (0..self.n_states).map(|s| self.row(s)).collect();
        greedy_policy(&rows)
    }

    /// Rows as nested vectors.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_states).map(|s| self.row(s).to_vec()).collect()
    }

    /// `Q(s,a) += alpha * (target - Q(s,a))` where the target is `r` for a
    /// terminal transition (`next = None`) and `r + gamma * max_a' Q(next, a')` otherwise.
    pub fn update(&mut self, s: usize, a: usize, r: f64, next: Option<usize>, alpha: f64, gamma: f64) {
        let bootstrap = next.map_or(0.0, |s2| gamma * self.max_value(s2));
        let i = self.idx(s, a);
        let current = self.values[i];
        self.values[i] = current + alpha * (r + bootstrap - current);
    }
}

/// Free-function form of [`QTable::update`].
pub fn q_update(q: &mut QTable, s: usize, a: usize, r: f64, next: Option<usize>, alpha: f64, gamma: f64) {
    q.update(s, a, r, next, alpha, gamma);
}

/// Uniform random action with probability `epsilon`, greedy otherwise. One
/// uniform variate is always consumed.
pub fn epsilon_greedy(q: &QTable, s: usize, epsilon: f64, rng: &mut SimRng) -> usize {
    if rng.uniform() < epsilon {
        rng.index(q.n_actions())
    } else {
        q.best_action(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::make_rng;
    use proptest::prelude::*;

    #[test]
    fn update_examples() {
        let mut q = QTable::zeros(2, 2);
        q.set(0, 0, 2.0);
        q.set(1, 1, 4.0);
        let mut full = q.clone();
        full.update(0, 0, 1.0, Some(1), 1.0, 0.9);
        assert!((full.get(0, 0) - (1.0 + 0.9 * 4.0)).abs() < 1e-12);

        let mut frozen = q.clone();
        frozen.update(0, 0, 1.0, Some(1), 0.0, 0.9);
        assert_eq!(frozen, q);

        let mut half = q.clone();
        q_update(&mut half, 0, 0, 1.0, Some(1), 0.5, 0.9);
        assert!((half.get(0, 0) - 3.3).abs() < 1e-12);

        let mut terminal = q.clone();
        terminal.update(0, 0, 1.0, None, 1.0, 0.9);
        assert_eq!(terminal.get(0, 0), 1.0);
    }

    #[test]
    #[should_panic]
    fn out_of_range_panics() {
        QTable::zeros(2, 2).update(5, 0, 0.0, None, 0.1, 0.9);
    }

    #[test]
    fn epsilon_zero_is_greedy() {
        let mut q = QTable::zeros(1, 4);
        q.set(0, 2, 1.0);
        let mut rng = make_rng(0);
        assert!((0..1000).all(|_| epsilon_greedy(&q, 0, 0.0, &mut rng) == 2));
    }

    #[test]
    fn epsilon_one_is_uniform() {
        let q = QTable::zeros(1, 5);
        let mut rng = make_rng(8);
        let n = 1_000_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            counts[epsilon_greedy(&q, 0, 1.0, &mut rng)] += 1;
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((f - 0.2).abs() < 0.01 * 0.2, "{f}");
        }
    }

    #[test]
    fn epsilon_greedy_reproducible() {
        let q = QTable::zeros(3, 4);
        let seq = |seed| {
            let mut rng = make_rng(seed);
            (0..100).map(|i| epsilon_greedy(&q, i % 3, 0.5, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(seq(4), seq(4));
    }

    proptest! {
        #[test]
        fn update_touches_one_entry(
            s in 0usize..4, a in 0usize..3, next in prop::option::of(0usize..4),
            r in -10.0f64..10.0, alpha in 0.01f64..1.0, seed in 0u64..1000,
        ) {
            let mut rng = make_rng(seed);
            let mut q = QTable::zeros(4, 3);
            for i in 0..4 { for j in 0..3 { q.set(i, j, rng.normal(3.0)); } }
            let before = q.clone();
            q.update(s, a, r, next, alpha, 0.9);
            for i in 0..4 {
                for j in 0..3 {
                    if (i, j) != (s, a) {
                        prop_assert_eq!(q.get(i, j).to_bits(), before.get(i, j).to_bits());
                    }
                }
            }
        }

        #[test]
        fn values_stay_within_discounted_reward_bound(
            seed in 0u64..10_000, alpha in 0.05f64..1.0, gamma in 0.0f64..0.95,
        ) {
            let bound_r = 2.0;
            let limit = bound_r / (1.0 - gamma) + 1e-9;
            let mut rng = make_rng(seed);
            let mut q = QTable::zeros(5, 3);
            for _ in 0..2_000 {
                let s = rng.index(5);
                let a = rng.index(3);
                let r = (rng.uniform() * 2.0 - 1.0) * bound_r;
                let next = if rng.uniform() < 0.1 { None } else { Some(rng.index(5)) };
                q.update(s, a, r, next, alpha, gamma);
            }
            prop_assert!(q.values().iter().all(|v| v.abs() <= limit));
        }
    }
}
