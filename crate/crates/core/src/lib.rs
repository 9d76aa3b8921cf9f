//! Reinforcement-learning scheduling for a small hybrid power grid.
//!
//! The crate contains a stochastic grid simulator (thermal units, a battery,
//! solar and wind), generic MDP tooling, tabular Q-learning, a small
//! multilayer perceptron with DQN and actor-critic agents built on it,
//! non-learning baselines, and an experiment harness with a CLI.

pub mod adapter;
pub mod baselines;
pub mod deep;
pub mod grid;
pub mod harness;
pub mod mdp;
pub mod nn;
pub mod parallel;
pub mod stochastic;
pub mod tabular;
