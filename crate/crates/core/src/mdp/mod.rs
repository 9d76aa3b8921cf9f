//! Generic episodic-environment interface plus an explicit tabular MDP with
//! exact dynamic-programming solutions used as ground truth for the agents.

mod env;
mod tabular;

pub use env::{EnvStep, EpisodicEnv, FeatureEnv, MdpEnv, TabularEnv};
pub use tabular::{
    argmax, episode_return, greedy_policy, sup_distance, value_iteration, MdpError, Policy, TabularMdp, ValueIteration,
};
