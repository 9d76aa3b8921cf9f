use super::TabularMdp;
use crate::grid::EnvError;
use crate::stochastic::SimRng;

/// Outcome of one environment step as seen by a learning agent.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep<O> {
    pub obs: O,
    pub reward: f64,
    /// Operating cost of the step; `-reward` for environments without a separate cost notion.
    pub cost: f64,
    /// True terminal state: no bootstrapping past it.
    pub done: bool,
    /// Time limit reached without a terminal state.
    pub truncated: bool,
}

impl<O> EnvStep<O> {
    pub fn ends_episode(&self) -> bool {
        self.done || self.truncated
    }
}

/// Episodic environment with a finite, indexed action set.
pub trait EpisodicEnv {
    type Obs: Clone;

    fn n_actions(&self) -> usize;

    /// Start a new episode. `rng` owns all randomness of the episode.
    fn reset(&mut self, rng: SimRng) -> Self::Obs;

    fn step(&mut self, action: usize) -> Result<EnvStep<Self::Obs>, EnvError>;
}

/// Environment whose observations map onto a finite state index.
pub trait TabularEnv: EpisodicEnv {
    fn n_states(&self) -> usize;
    fn state_index(&self, obs: &Self::Obs) -> usize;
}

/// Environment whose observations map onto a fixed-length feature vector.
pub trait FeatureEnv: EpisodicEnv {
    fn feature_len(&self) -> usize;
    fn features(&self, obs: &Self::Obs) -> Vec<f64>;
}

/// Runs a [`TabularMdp`] episodically: uniform random start state, time limit
/// `horizon`, never terminal. Features are one-hot state encodings.
#[derive(Debug, Clone)]
pub struct MdpEnv {
    mdp: TabularMdp,
    horizon: usize,
    state: usize,
    t: usize,
    rng: SimRng,
}

impl MdpEnv {
    pub fn new(mdp: TabularMdp, horizon: usize) -> Self {
        assert!(horizon > 0, "horizon must be positive");
        Self {
            mdp,
            horizon,
            state: 0,
            t: 0,
            rng: SimRng::new(0),
        }
    }

    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }
}

impl EpisodicEnv for MdpEnv {
    type Obs = usize;

    fn n_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    fn reset(&mut self, rng: SimRng) -> usize {
        self.rng = rng;
        self.t = 0;
        self.state = self.rng.index(self.mdp.n_states());
        self.state
    }

    fn step(&mut self, action: usize) -> Result<EnvStep<usize>, EnvError> {
        if self.t >= self.horizon {
            return Err(EnvError::EpisodeComplete(self.t));
        }
        let reward = self.mdp.reward(self.state, action);
        let u = self.rng.uniform();
        let dist = self.mdp.transition(self.state, action);
        let mut acc = 0.0;
        let mut next = dist.len() - 1;
        for (s2, &p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                next = s2;
                break;
            }
        }
        self.state = next;
        self.t += 1;
        Ok(EnvStep {
            obs: next,
            reward,
            cost: -reward,
            done: false,
            truncated: self.t == self.horizon,
        })
    }
}

impl TabularEnv for MdpEnv {
    fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    fn state_index(&self, obs: &usize) -> usize {
        *obs
    }
}

impl FeatureEnv for MdpEnv {
    fn feature_len(&self) -> usize {
        self.mdp.n_states()
    }

    fn features(&self, obs: &usize) -> Vec<f64> {
        let mut v = vec![0.0; self.mdp.n_states()];
        v[*obs] = 1.0;
        v
    }
}
