//! Tabular Q-learning over a discretized grid state and a shared set of
//! relative action templates.

mod qtable;
mod scheme;
mod templates;
mod train;

pub use qtable::{epsilon_greedy, q_update, QTable};
pub use scheme::{Bins, DiscretizationScheme, SchemeError};
pub use templates::{action_templates, ActionTemplate, StorageMode};
pub use train::{linear_epsilon, train_tabular, AlphaSchedule, TabularHyper};
