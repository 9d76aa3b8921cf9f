use serde::{Deserialize, Serialize};

use super::{epsilon_greedy, QTable};
use crate::grid::{ConfigError, EnvError};
use crate::harness::{rollout_means, CurvePoint, LearningCurve};
use crate::mdp::TabularEnv;
use crate::stochastic::make_rng;

/// Per-update learning rate. The per-pair schedules use the visit count `n`
/// of the updated pair (`n >= 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AlphaSchedule {
    /// `alpha`
    Constant,
    /// `alpha / n`
    Harmonic,
    /// `alpha * c / (c + n - 1)`
    Rescaled { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularHyper {
    pub alpha: f64,
    pub alpha_schedule: AlphaSchedule,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_episodes: usize,
    pub episodes: usize,
    /// Evaluate the greedy policy after every `eval_every` episodes; 0 disables.
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// Multiplies environment rewards before they enter the update.
    pub reward_scale: f64,
}

impl Default for TabularHyper {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            alpha_schedule: AlphaSchedule::Constant,
            gamma: 0.95,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_episodes: 4000,
            episodes: 5000,
            eval_every: 25,
            eval_episodes: 5,
            reward_scale: 1e-3,
        }
    }
}

impl TabularHyper {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |f: &str, r: &str| Err(ConfigError::invalid(format!("agent.qlearning.{f}"), r));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", "must lie in (0, 1]");
        }
        if let AlphaSchedule::Rescaled { c } = self.alpha_schedule {
            if c.is_nan() || c <= 0.0 {
                return bad("alpha_schedule", "rescaled offset must be > 0");
            }
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1)");
        }
        for (f, e) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&e) {
                return bad(f, "must lie in [0, 1]");
            }
        }
        if self.epsilon_end > self.epsilon_start {
            return bad("epsilon_end", "must not exceed epsilon_start");
        }
        if !(self.reward_scale.is_finite() && self.reward_scale > 0.0) {
            return bad("reward_scale", "must be > 0");
        }
        Ok(())
    }

    pub fn alpha_for(&self, visits: u32) -> f64 {
        let n = f64::from(visits.max(1));
        match self.alpha_schedule {
            AlphaSchedule::Constant => self.alpha,
            AlphaSchedule::Harmonic => self.alpha / n,
            AlphaSchedule::Rescaled { c } => self.alpha * c / (c + n - 1.0),
        }
    }
}

/// Exploration rate for `episode`: linear from `start` to `end` over `decay_episodes`.
pub fn linear_epsilon(start: f64, end: f64, decay_episodes: usize, episode: usize) -> f64 {
    if decay_episodes == 0 {
        return end;
    }
    if episode >= decay_episodes {
        return end;
    }
    start + (end - start) * (episode as f64 / decay_episodes as f64)
}

/// Epsilon-greedy Q-learning. Streams derived from `seed`: `agent` for
/// exploration, `train` for training episodes, `curve-eval` for the fixed
/// evaluation episodes behind the learning curve.
pub fn train_tabular<E: TabularEnv>(
    env: &mut E,
    hyper: &TabularHyper,
    seed: u64,
) -> Result<(QTable, LearningCurve), EnvError> {
    hyper.validate()?;
    let root = make_rng(seed);
    let mut agent_rng = root.split("agent");
    let train_stream = root.split("train");
    let eval_stream = root.split("curve-eval");

    let mut q = QTable::zeros(env.n_states(), env.n_actions());
    let mut curve = LearningCurve::new();

    for episode in 0..hyper.episodes {
        let epsilon = linear_epsilon(hyper.epsilon_start, hyper.epsilon_end, hyper.epsilon_decay_episodes, episode);
        let mut obs = env.reset(train_stream.split_index(episode as u64));
        loop {
            let s = env.state_index(&obs);
            let a = epsilon_greedy(&q, s, epsilon, &mut agent_rng);
            let step = env.step(a)?;
            let next = (!step.done).then(|| env.state_index(&step.obs));
            let visits = q.record_visit(s, a);
            q.update(s, a, step.reward * hyper.reward_scale, next, hyper.alpha_for(visits), hyper.gamma);
            if step.ends_episode() {
                break;
            }
            obs = step.obs;
        }

        if hyper.eval_every > 0 && (episode + 1) % hyper.eval_every == 0 {
            let (mean_return, mean_cost) =
                rollout_means(env, &eval_stream, hyper.eval_episodes, |e, o| q.best_action(e.state_index(o)))?;
            curve.push(CurvePoint {
                episode: episode + 1,
                mean_return,
                mean_cost,
            });
        }
    }
    Ok((q, curve))
}
