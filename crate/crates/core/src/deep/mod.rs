//! Function-approximation agents over the continuous grid state: DQN with a
//! replay buffer and periodically synchronized target network, and an
//! online actor-critic with a softmax actor and an action-value critic.

mod actor_critic;
mod dqn;
mod features;
mod replay;

pub use actor_critic::{
    actor_critic_step, log_prob_grad, log_softmax, sample_categorical, softmax, train_actor_critic, AcHyper, ActorGradient,
    AcTransition,
};
pub use dqn::{dqn_loss_and_grads, target_sync, train_dqn, DqnHyper};
pub use features::{featurize, FeatureScales};
pub use replay::{ReplayBuffer, Transition};
