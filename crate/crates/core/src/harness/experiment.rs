use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::curve::{detect_convergence, LearningCurve};
use super::evaluate::{evaluate_with_trajectory, trajectory_csv, MetricsReport};
use super::file_config::ExperimentConfig;
use super::persist::{load_policy, save_policy, PersistError};
use super::policy::{
    ActorCriticPolicy, AgentKind, AgentPolicy, DqnPolicy, GridPolicy, PriorityListPolicy, RandomPolicy, TabularPolicy,
};
use crate::adapter::DiscreteGridEnv;
use crate::deep::{train_actor_critic, train_dqn};
use crate::grid::{ConfigError, EnvError};
use crate::parallel::{map_indexed, Execution};
use crate::tabular::{train_tabular, SchemeError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub agent: Option<AgentKind>,
}

/// A trained (or baseline) policy with its learning curve and evaluation.
#[derive(Debug, Clone)]
pub struct AgentOutcome {
    pub kind: AgentKind,
    pub policy: AgentPolicy,
    pub curve: LearningCurve,
    pub report: MetricsReport,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let config = ExperimentConfig::from_toml_str(&text).map_err(|message| HarnessError::Parse {
        path: path.display().to_string(),
        message,
    })?;
    config.validate()?;
    Ok(config)
}

/// Train one agent. Baselines need no training and come back with an empty curve.
pub fn train_agent(config: &ExperimentConfig, kind: AgentKind, seed: u64) -> Result<(AgentPolicy, LearningCurve), HarnessError> {
    let grid = config.grid_config();
    let scheme = config.scheme()?;
    let make_env = || DiscreteGridEnv::new(grid.clone(), scheme.clone());
    Ok(match kind {
        AgentKind::Qlearning => {
            let mut env = make_env()?;
            let (q, curve) = train_tabular(&mut env, &config.agent.qlearning.hyper(), seed)?;
            (AgentPolicy::Tabular(TabularPolicy { scheme, q }), curve)
        }
        AgentKind::Dqn => {
            let mut env = make_env()?;
            let (network, curve) = train_dqn(&mut env, &config.agent.dqn, seed)?;
            let policy = DqnPolicy {
                network,
                templates: env.templates().to_vec(),
                scales: env.scales().clone(),
            };
            (AgentPolicy::Dqn(policy), curve)
        }
        AgentKind::ActorCritic => {
            let mut env = make_env()?;
            let (actor, critic, curve) = train_actor_critic(&mut env, &config.agent.actor_critic, seed)?;
            let policy = ActorCriticPolicy {
                actor,
                critic,
                templates: env.templates().to_vec(),
                scales: env.scales().clone(),
            };
            (AgentPolicy::ActorCritic(policy), curve)
        }
        AgentKind::PriorityList => (AgentPolicy::PriorityList(PriorityListPolicy), LearningCurve::new()),
        AgentKind::Random => (
            AgentPolicy::Random(RandomPolicy {
                templates: config.templates(),
            }),
            LearningCurve::new(),
        ),
    })
}

fn train_and_evaluate(config: &ExperimentConfig, kind: AgentKind, seed: u64) -> Result<AgentOutcome, HarnessError> {
    let (policy, curve) = train_agent(config, kind, seed)?;
    let e = &config.experiment;
    let (mut report, _) = evaluate_with_trajectory(
        &policy,
        &config.grid_config(),
        e.eval_episodes,
        seed,
        Execution::from_flag(e.parallel),
    )?;
    report.convergence_episode = detect_convergence(&curve, e.convergence_window, e.convergence_band);
    Ok(AgentOutcome {
        kind,
        policy,
        curve,
        report,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(io_error(path))
}

fn report_json(report: &MetricsReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `curve.csv`, `report.json` and `policy.bin` into `dir`.
pub fn write_artifacts(outcome: &AgentOutcome, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    write_file(&dir.join("curve.csv"), outcome.curve.to_csv().as_bytes())?;
    write_file(&dir.join("report.json"), report_json(&outcome.report).as_bytes())?;
    save_policy(&outcome.policy, &dir.join("policy.bin"))?;
    Ok(())
}

fn run_agents(
    config: &ExperimentConfig,
    agents: &[AgentKind],
    seed: u64,
) -> Result<Vec<AgentOutcome>, HarnessError> {
    let mode = Execution::from_flag(config.experiment.parallel);
    map_indexed(agents.len(), mode, |i| train_and_evaluate(config, agents[i], seed))
        .into_iter()
        .collect()
}

/// `train`: trains the selected agent, or every agent listed in the config.
/// A single agent writes its artifacts directly into `out`; several agents
/// each get a subdirectory named after the agent.
pub fn train_command(config_path: &Path, out: &Path, options: &RunOptions) -> Result<Vec<AgentOutcome>, HarnessError> {
    let config = load_config(config_path)?;
    let seed = options.seed.unwrap_or(config.experiment.seed);
    let agents = match options.agent {
        Some(kind) => vec![kind],
        None => config.experiment.agents.clone(),
    };
    if agents.is_empty() {
        return Err(HarnessError::Usage("no agents selected".into()));
    }
    let outcomes = run_agents(&config, &agents, seed)?;
    for o in &outcomes {
        let dir = if outcomes.len() == 1 {
            out.to_path_buf()
        } else {
            out.join(o.kind.name())
        };
        write_artifacts(o, &dir)?;
    }
    Ok(outcomes)
}

/// Trains every agent listed in the config file with its own seed and writes
/// the artifacts under `output_dir`.
pub fn run_experiment(config_path: &Path, output_dir: &Path) -> Result<Vec<AgentOutcome>, HarnessError> {
    train_command(config_path, output_dir, &RunOptions::default())
}

/// `evaluate`: runs a stored policy (or a baseline) and writes `report.json`
/// and `trajectory.csv` into `out`.
pub fn evaluate_command(
    config_path: &Path,
    out: &Path,
    policy_path: Option<&Path>,
    options: &RunOptions,
) -> Result<MetricsReport, HarnessError> {
    let config = load_config(config_path)?;
    let seed = options.seed.unwrap_or(config.experiment.seed);
    let policy = match (policy_path, options.agent) {
        (Some(path), agent) => {
            let policy = load_policy(path)?;
            if let Some(kind) = agent.filter(|&k| k != policy.kind()) {
                return Err(HarnessError::Usage(format!(
                    "{} holds a {} policy, not {kind}",
                    path.display(),
                    policy.kind()
                )));
            }
            policy
        }
        (None, Some(kind)) if !kind.is_learned() => train_agent(&config, kind, seed)?.0,
        (None, Some(kind)) => {
            return Err(HarnessError::Usage(format!("evaluating {kind} requires --policy <file>")));
        }
        (None, None) => return Err(HarnessError::Usage("evaluate needs --policy or --agent".into())),
    };
    let (report, records) = evaluate_with_trajectory(
        &policy,
        &config.grid_config(),
        config.experiment.eval_episodes,
        seed,
        Execution::from_flag(config.experiment.parallel),
    )?;
    fs::create_dir_all(out).map_err(io_error(out))?;
    write_file(&out.join("report.json"), report_json(&report).as_bytes())?;
    write_file(&out.join("trajectory.csv"), trajectory_csv(&records).as_bytes())?;
    Ok(report)
}

/// `compare`: trains the three learners, evaluates them next to both
/// baselines on the same evaluation days, and writes per-agent artifacts plus
/// `comparison.csv` and `comparison.json`.
pub fn compare(config_path: &Path, out: &Path, options: &RunOptions) -> Result<Vec<AgentOutcome>, HarnessError> {
    let config = load_config(config_path)?;
    let seed = options.seed.unwrap_or(config.experiment.seed);
    let outcomes = run_agents(&config, &AgentKind::ALL, seed)?;
    for o in &outcomes {
        write_artifacts(o, &out.join(o.kind.name()))?;
    }
    write_file(&out.join("comparison.csv"), comparison_csv(&outcomes).as_bytes())?;
    let reports: Vec<&MetricsReport> = outcomes.iter().map(|o| &o.report).collect();
    let mut json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    json.push('\n');
    write_file(&out.join("comparison.json"), json.as_bytes())?;
    Ok(outcomes)
}

fn comparison_csv(outcomes: &[AgentOutcome]) -> String {
    let mut s = String::from(
        "agent,monthly_cost,mean_episode_cost,renewable_utilization,imbalance_events,shed_events,shed_mwh,convergence_episode\n",
    );
    for o in outcomes {
        let r = &o.report;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.agent,
            r.monthly_cost_estimate,
            r.mean_episode_cost,
            r.renewable_utilization,
            r.imbalance_events,
            r.shed_events,
            r.shed_mwh_total,
            r.convergence_episode.map_or(String::new(), |e| e.to_string())
        ));
    }
    s
}

/// Human-readable comparison: one row per metric, one column per agent.
pub fn comparison_table(reports: &[MetricsReport]) -> String {
    type Cell = Box<dyn Fn(&MetricsReport) -> String>;
    let rows: [(&str, Cell); 6] = [
        ("Operating cost ($/month)", Box::new(|r| format!("{:.0}", r.monthly_cost_estimate))),
        ("Renewable utilization (%)", Box::new(|r| format!("{:.1}", r.renewable_utilization))),
        ("Imbalance events", Box::new(|r| r.imbalance_events.to_string())),
        ("Shed events", Box::new(|r| r.shed_events.to_string())),
        ("Shed energy (MWh)", Box::new(|r| format!("{:.1}", r.shed_mwh_total))),
        (
            "Convergence (episodes)",
            Box::new(|r| r.convergence_episode.map_or("-".into(), |e| e.to_string())),
        ),
    ];
    let label_width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let col_width = reports.iter().map(|r| r.agent.len()).max().unwrap_or(0).max(10);
    let mut s = format!("{:label_width$}", "");
    for r in reports {
        s.push_str(&format!("  {:>col_width$}", r.agent));
    }
    s.push('\n');
    for (label, cell) in &rows {
        s.push_str(&format!("{label:label_width$}"));
        for r in reports {
            s.push_str(&format!("  {:>col_width$}", cell(r)));
        }
        s.push('\n');
    }
    s
}

/// Default location of a stored policy inside an output directory.
pub fn policy_path(out: &Path) -> PathBuf {
    out.join("policy.bin")
}
