//! Experiment orchestration: policies, evaluation metrics, learning curves,
//! convergence detection, policy persistence and the config-driven runner.

mod curve;
mod evaluate;
mod experiment;
mod file_config;
mod persist;
mod policy;

pub use curve::{detect_convergence, rollout_means, CurvePoint, LearningCurve};
pub use evaluate::{evaluate, evaluate_with_trajectory, trajectory_csv, MetricsReport, StepRecord, IMBALANCE_TOLERANCE_MWH};
pub use experiment::{
    compare, comparison_table, evaluate_command, load_config, policy_path, run_experiment, train_agent, train_command,
    write_artifacts, AgentOutcome, HarnessError, RunOptions,
};
pub use file_config::{
    ActorCriticSection, AgentSections, DqnSection, ExperimentConfig, ExperimentSection, GridSection, PenaltiesSection,
    QLearningSection,
};
pub use persist::{decode_policy, encode_policy, load_policy, save_policy, PersistError, POLICY_FORMAT_VERSION, POLICY_MAGIC};
pub use policy::{
    ActorCriticPolicy, AgentKind, AgentPolicy, DqnPolicy, GridPolicy, PriorityListPolicy, RandomPolicy, TabularPolicy,
};
