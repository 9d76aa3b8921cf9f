use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridsched::harness::{
    compare, comparison_table, evaluate_command, policy_path, train_command, AgentKind, HarnessError, MetricsReport,
    RunOptions,
};

#[derive(Parser)]
#[command(name = "gridsched", version, about = "Train and evaluate grid scheduling agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// qlearning, dqn, actor_critic, priority_list or random.
    #[arg(long)]
    agent: Option<AgentKind>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            agent: self.agent,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train agents and write curve.csv, report.json and policy.bin.
    Train(Common),
    /// Evaluate a stored policy or a baseline; writes report.json and trajectory.csv.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Policy file (defaults to <out>/policy.bin for learned agents).
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Train all learners, evaluate them with both baselines and print a comparison.
    Compare(Common),
}

fn print_summary(report: &MetricsReport) {
    println!(
        "{:>13}: cost ${:.0}/month, renewables {:.1}%, {} imbalance events, {} shed events",
        report.agent,
        report.monthly_cost_estimate,
        report.renewable_utilization,
        report.imbalance_events,
        report.shed_events
    );
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train(c) => {
            for o in train_command(&c.config, &c.out, &c.options())? {
                print_summary(&o.report);
            }
        }
        Command::Evaluate { common: c, policy } => {
            let default_policy = policy_path(&c.out);
            let policy = match (&policy, c.agent) {
                (Some(p), _) => Some(p.as_path()),
                (None, Some(kind)) if !kind.is_learned() => None,
                (None, _) => Some(default_policy.as_path()),
            };
            print_summary(&evaluate_command(&c.config, &c.out, policy, &c.options())?);
        }
        Command::Compare(c) => {
            if c.agent.is_some() {
                return Err(HarnessError::Usage("compare always runs every agent; drop --agent".into()));
            }
            let outcomes = compare(&c.config, &c.out, &c.options())?;
            let reports: Vec<MetricsReport> = outcomes.into_iter().map(|o| o.report).collect();
            print!("{}", comparison_table(&reports));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
