use serde::{Deserialize, Serialize};

use crate::grid::{ConfigError, EnvError};
use crate::harness::{rollout_means, CurvePoint, LearningCurve};
use crate::mdp::{argmax, FeatureEnv};
use crate::nn::{init_network, Network};
use crate::stochastic::{make_rng, SimRng};

/// How the actor's policy-gradient estimate is formed from the critic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorGradient {
    /// `grad log pi(a|s) * Q(s, a)` for the sampled action only.
    Sampled,
    /// The expectation of the sampled estimate over `a ~ pi(.|s)`, summed
    /// exactly over the discrete actions: `sum_a pi(a|s) grad log pi(a|s) Q(s, a)`.
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcHyper {
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub episodes: usize,
    /// Weight of the policy-entropy bonus in the actor update.
    pub entropy_weight: f64,
    pub actor_gradient: ActorGradient,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub hidden: Vec<usize>,
    pub reward_scale: f64,
}

impl Default for AcHyper {
    fn default() -> Self {
        Self {
            gamma: 0.7,
            actor_lr: 3e-3,
            critic_lr: 1e-3,
            episodes: 20_000,
            entropy_weight: 0.3,
            actor_gradient: ActorGradient::Expected,
            eval_every: 250,
            eval_episodes: 5,
            hidden: vec![64, 64],
            reward_scale: 1e-3,
        }
    }
}

impl AcHyper {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |f: &str, r: &str| Err(ConfigError::invalid(format!("agent.actor_critic.{f}"), r));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1)");
        }
        if !(self.actor_lr > 0.0 && self.actor_lr.is_finite()) {
            return bad("actor_lr", "must be > 0");
        }
        if !(self.critic_lr > 0.0 && self.critic_lr.is_finite()) {
            return bad("critic_lr", "must be > 0");
        }
        if !(self.entropy_weight >= 0.0 && self.entropy_weight.is_finite()) {
            return bad("entropy_weight", "must be >= 0");
        }
        if self.hidden.contains(&0) {
            return bad("hidden", "layer sizes must be positive");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale", "must be > 0");
        }
        Ok(())
    }
}

/// Numerically stable `log softmax`.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|z| z - log_sum).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Gradient of `log softmax(logits)[action]` with respect to the logits: `onehot(action) - softmax(logits)`.
pub fn log_prob_grad(logits: &[f64], action: usize) -> Vec<f64> {
    let mut g: Vec<f64> = softmax(logits).into_iter().map(|p| -p).collect();
    g[action] += 1.0;
    g
}

/// Inverse-CDF draw from a probability vector; one uniform variate per call.
pub fn sample_categorical(probs: &[f64], rng: &mut SimRng) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// One on-policy transition `(s, a, r, s', a')`. `next_action` is the action
/// the actor sampled in `s'`; it is ignored when `done`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcTransition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub next_action: Option<usize>,
    pub done: bool,
}

/// Online update of both networks from one transition; returns the TD error.
///
/// The critic outputs `Q(s, ·)`. With `td = r + gamma * Q(s', a') * (1 - done) - Q(s, a)`,
/// the critic descends `td^2` (target held fixed) and the actor ascends
/// `grad log pi(a|s) * Q(s, a)` (see [`ActorGradient`]) plus
/// `entropy_weight * grad H(pi(.|s))`, both evaluated with the pre-update critic.
pub fn actor_critic_step(actor: &mut Network, critic: &mut Network, t: &AcTransition, hyper: &AcHyper) -> f64 {
    let n_actions = critic.output_len();
    assert_eq!(actor.output_len(), n_actions, "actor and critic disagree on action count");

    let q_s = critic.forward(&t.state);
    let q_sa = q_s[t.action];
    let bootstrap = match (t.done, t.next_action) {
        (false, Some(a2)) => hyper.gamma * critic.forward(&t.next_state)[a2],
        _ => 0.0,
    };
    let td = t.reward + bootstrap - q_sa;

    let mut upstream = vec![0.0; n_actions];
    upstream[t.action] = -2.0 * td;
    let critic_grads = critic.backward(&t.state, &upstream);
    critic.apply_gradients(&critic_grads, hyper.critic_lr);

    let logits = actor.forward(&t.state);
    let mut ascent: Vec<f64> = match hyper.actor_gradient {
        ActorGradient::Sampled => log_prob_grad(&logits, t.action).into_iter().map(|g| g * q_sa).collect(),
        ActorGradient::Expected => {
            let probs = softmax(&logits);
            let v: f64 = probs.iter().zip(&q_s).map(|(p, q)| p * q).sum();
            probs.iter().zip(&q_s).map(|(p, q)| p * (q - v)).collect()
        }
    };
    if hyper.entropy_weight > 0.0 {
        let probs = softmax(&logits);
        let logp = log_softmax(&logits);
        let entropy: f64 = -probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
        for ((g, p), l) in ascent.iter_mut().zip(&probs).zip(&logp) {
            *g += hyper.entropy_weight * (-p * (l + entropy));
        }
    }
    let descent: Vec<f64> = ascent.into_iter().map(|g| -g).collect();
    let actor_grads = actor.backward(&t.state, &descent);
    actor.apply_gradients(&actor_grads, hyper.actor_lr);
    td
}

/// Online actor-critic training. Streams derived from `seed`: `actor-init`,
/// `critic-init`, `agent` for action sampling, `train` and `curve-eval` for
/// episodes. Evaluation uses the mode of the policy.
pub fn train_actor_critic<E: FeatureEnv>(
    env: &mut E,
    hyper: &AcHyper,
    seed: u64,
) -> Result<(Network, Network, LearningCurve), EnvError> {
    hyper.validate()?;
    let root = make_rng(seed);
    let mut sizes = vec![env.feature_len()];
    sizes.extend(&hyper.hidden);
    sizes.push(env.n_actions());
    let to_config = |e: crate::nn::NnError| ConfigError::invalid("agent.actor_critic.hidden", e.to_string());
    let mut actor = init_network(&sizes, root.split("actor-init").seed()).map_err(to_config)?;
    let mut critic = init_network(&sizes, root.split("critic-init").seed()).map_err(to_config)?;
    let mut agent_rng = root.split("agent");
    let train_stream = root.split("train");
    let eval_stream = root.split("curve-eval");
    let mut curve = LearningCurve::new();

    for episode in 0..hyper.episodes {
        let obs = env.reset(train_stream.split_index(episode as u64));
        let mut features = env.features(&obs);
        let mut action = sample_categorical(&softmax(&actor.forward(&features)), &mut agent_rng);
        loop {
            let step = env.step(action)?;
            let next_features = env.features(&step.obs);
            let next_action = if step.done {
                None
            } else {
                Some(sample_categorical(&softmax(&actor.forward(&next_features)), &mut agent_rng))
            };
            let transition = AcTransition {
                state: features,
                action,
                reward: step.reward * hyper.reward_scale,
                next_state: next_features,
                next_action,
                done: step.done,
            };
            actor_critic_step(&mut actor, &mut critic, &transition, hyper);
            if step.ends_episode() {
                break;
            }
            features = transition.next_state;
            action = next_action.expect("non-terminal step has a next action");
        }

        if hyper.eval_every > 0 && (episode + 1) % hyper.eval_every == 0 {
            let (mean_return, mean_cost) = rollout_means(env, &eval_stream, hyper.eval_episodes, |e, o| {
                argmax(&actor.forward(&e.features(o)))
            })?;
            curve.push(CurvePoint {
                episode: episode + 1,
                mean_return,
                mean_cost,
            });
        }
    }
    Ok((actor, critic, curve))
}
