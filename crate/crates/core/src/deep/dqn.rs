use serde::{Deserialize, Serialize};

use super::{ReplayBuffer, Transition};
use crate::grid::{ConfigError, EnvError};
use crate::harness::{rollout_means, CurvePoint, LearningCurve};
use crate::mdp::{argmax, FeatureEnv};
use crate::nn::{init_network, Gradients, Network};
use crate::stochastic::make_rng;
use crate::tabular::linear_epsilon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnHyper {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub capacity: usize,
    /// Copy online parameters into the target network every this many environment steps.
    pub target_sync_every: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_episodes: usize,
    pub episodes: usize,
    /// Environment steps before the first gradient update.
    pub warmup_steps: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub hidden: Vec<usize>,
    pub reward_scale: f64,
    /// Rescale each batch gradient to at most this L2 norm; 0 disables.
    pub max_grad_norm: f64,
}

impl Default for DqnHyper {
    fn default() -> Self {
        Self {
            gamma: 0.7,
            learning_rate: 0.01,
            batch_size: 32,
            capacity: 20_000,
            target_sync_every: 500,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_episodes: 600,
            episodes: 1000,
            warmup_steps: 500,
            eval_every: 25,
            eval_episodes: 5,
            hidden: vec![64, 64],
            reward_scale: 1e-3,
            max_grad_norm: 0.0,
        }
    }
}

impl DqnHyper {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |f: &str, r: &str| Err(ConfigError::invalid(format!("agent.dqn.{f}"), r));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be > 0");
        }
        if self.batch_size == 0 || self.batch_size > self.capacity {
            return bad("batch_size", "need 1 <= batch_size <= capacity");
        }
        if self.target_sync_every == 0 {
            return bad("target_sync_every", "must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start)
            || !(0.0..=1.0).contains(&self.epsilon_end)
            || self.epsilon_end > self.epsilon_start
        {
            return bad("epsilon_end", "need 0 <= epsilon_end <= epsilon_start <= 1");
        }
        if self.hidden.contains(&0) {
            return bad("hidden", "layer sizes must be positive");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale", "must be > 0");
        }
        if self.max_grad_norm.is_nan() || self.max_grad_norm < 0.0 {
            return bad("max_grad_norm", "must be >= 0");
        }
        Ok(())
    }
}

/// Mean squared TD error over `batch` and its gradient with respect to the
/// online parameters. Targets use the target network's max over next actions
/// and no bootstrap on terminal transitions; they are treated as constants.
pub fn dqn_loss_and_grads(batch: &[&Transition], online: &Network, target: &Network, gamma: f64) -> (f64, Gradients) {
    assert!(!batch.is_empty(), "DQN loss needs a non-empty batch");
    let n = batch.len() as f64;
    let mut grads = Gradients::zeros_like(online);
    let mut loss = 0.0;
    let mut upstream = vec![0.0; online.output_len()];
    for t in batch {
        let bootstrap = if t.done {
            0.0
        } else {
            target.forward(&t.next_state).into_iter().fold(f64::NEG_INFINITY, f64::max)
        };
        let y = t.reward + gamma * bootstrap;
        let q = online.forward(&t.state)[t.action];
        let err = q - y;
        loss += err * err / n;
        upstream.iter_mut().for_each(|u| *u = 0.0);
        upstream[t.action] = 2.0 * err / n;
        online.backward_into(&t.state, &upstream, &mut grads);
    }
    (loss, grads)
}

/// Hard copy of the online parameters into the target network.
pub fn target_sync(online: &Network, target: &mut Network) {
    assert_eq!(online.sizes(), target.sizes(), "network shapes differ");
    target.params_mut().copy_from_slice(online.params());
}

/// Train a DQN agent. Streams derived from `seed`: `init` for the network,
/// `agent` for exploration and replay sampling, `train` for episodes,
/// `curve-eval` for the fixed evaluation episodes.
pub fn train_dqn<E: FeatureEnv>(env: &mut E, hyper: &DqnHyper, seed: u64) -> Result<(Network, LearningCurve), EnvError> {
    hyper.validate()?;
    let root = make_rng(seed);
    let mut sizes = vec![env.feature_len()];
    sizes.extend(&hyper.hidden);
    sizes.push(env.n_actions());
    let mut online = init_network(&sizes, root.split("init").seed())
        .map_err(|e| ConfigError::invalid("agent.dqn.hidden", e.to_string()))?;
    let mut target = online.clone();
    let mut agent_rng = root.split("agent");
    let train_stream = root.split("train");
    let eval_stream = root.split("curve-eval");

    let mut buffer = ReplayBuffer::new(hyper.capacity);
    let mut curve = LearningCurve::new();
    let mut total_steps = 0usize;

    for episode in 0..hyper.episodes {
        let epsilon = linear_epsilon(hyper.epsilon_start, hyper.epsilon_end, hyper.epsilon_decay_episodes, episode);
        let obs = env.reset(train_stream.split_index(episode as u64));
        let mut features = env.features(&obs);
        loop {
            let explore = agent_rng.uniform() < epsilon;
            let action = if explore {
                agent_rng.index(env.n_actions())
            } else {
                argmax(&online.forward(&features))
            };
            let step = env.step(action)?;
            let next_features = env.features(&step.obs);
            buffer.push(Transition {
                state: features,
                action,
                reward: step.reward * hyper.reward_scale,
                next_state: next_features.clone(),
                done: step.done,
            });
            total_steps += 1;

            if total_steps >= hyper.warmup_steps && buffer.len() >= hyper.batch_size {
                let batch = buffer.sample(hyper.batch_size, &mut agent_rng);
                let (_, mut grads) = dqn_loss_and_grads(&batch, &online, &target, hyper.gamma);
                if hyper.max_grad_norm > 0.0 {
                    let norm = grads.norm();
                    if norm > hyper.max_grad_norm {
                        grads.scale(hyper.max_grad_norm / norm);
                    }
                }
                online.apply_gradients(&grads, hyper.learning_rate);
            }
            if total_steps.is_multiple_of(hyper.target_sync_every) {
                target_sync(&online, &mut target);
            }

            if step.ends_episode() {
                break;
            }
            features = next_features;
        }

        if hyper.eval_every > 0 && (episode + 1) % hyper.eval_every == 0 {
            let (mean_return, mean_cost) = rollout_means(env, &eval_stream, hyper.eval_episodes, |e, o| {
                argmax(&online.forward(&e.features(o)))
            })?;
            curve.push(CurvePoint {
                episode: episode + 1,
                mean_return,
                mean_cost,
            });
        }
    }
    Ok((online, curve))
}
