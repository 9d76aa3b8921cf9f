use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{priority_list_dispatch, random_policy};
use crate::deep::FeatureScales;
use crate::grid::{ConfigError, GridAction, GridConfig, GridState};
use crate::mdp::argmax;
use crate::nn::Network;
use crate::stochastic::SimRng;
use crate::tabular::{ActionTemplate, DiscretizationScheme, QTable};

/// Anything that can operate the grid during evaluation. Implementations are
/// immutable while acting; stochastic ones draw only from the supplied `rng`.
pub trait GridPolicy: Sync {
    fn kind(&self) -> AgentKind;

    fn act(&self, state: &GridState, config: &GridConfig, rng: &mut SimRng) -> GridAction;

    /// Rejects configurations the policy was not built for.
    fn check_compatible(&self, config: &GridConfig) -> Result<(), ConfigError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Qlearning,
    Dqn,
    ActorCritic,
    PriorityList,
    Random,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Qlearning,
        AgentKind::Dqn,
        AgentKind::ActorCritic,
        AgentKind::PriorityList,
        AgentKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Qlearning => "qlearning",
            AgentKind::Dqn => "dqn",
            AgentKind::ActorCritic => "actor_critic",
            AgentKind::PriorityList => "priority_list",
            AgentKind::Random => "random",
        }
    }

    pub fn is_learned(self) -> bool {
        matches!(self, AgentKind::Qlearning | AgentKind::Dqn | AgentKind::ActorCritic)
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            AgentKind::Qlearning => 1,
            AgentKind::Dqn => 2,
            AgentKind::ActorCritic => 3,
            AgentKind::PriorityList => 4,
            AgentKind::Random => 5,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                format!("unknown agent `{s}` (expected one of: {})", names.join(", "))
            })
    }
}

fn check_templates(templates: &[ActionTemplate], config: &GridConfig) -> Result<(), ConfigError> {
    if templates.is_empty() {
        return Err(ConfigError::Dimension("policy has no actions".into()));
    }
    let n = config.n_generators();
    if let Some(t) = templates.iter().find(|t| t.gen_delta.len() != n) {
        return Err(ConfigError::Dimension(format!(
            "policy actions address {} generators, config has {n}",
            t.gen_delta.len()
        )));
    }
    Ok(())
}

fn check_network(net: &Network, scales: &FeatureScales, templates: &[ActionTemplate], config: &GridConfig) -> Result<(), ConfigError> {
    check_templates(templates, config)?;
    if scales.gen_max.len() != config.n_generators() {
        return Err(ConfigError::Dimension(format!(
            "policy features cover {} generators, config has {}",
            scales.gen_max.len(),
            config.n_generators()
        )));
    }
    if net.input_len() != scales.len() || net.output_len() != templates.len() {
        return Err(ConfigError::Dimension(format!(
            "network maps {} -> {}, expected {} -> {}",
            net.input_len(),
            net.output_len(),
            scales.len(),
            templates.len()
        )));
    }
    Ok(())
}

/// Greedy action from a Q-table over a discretized state.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    pub scheme: DiscretizationScheme,
    pub q: QTable,
}

impl GridPolicy for TabularPolicy {
    fn kind(&self) -> AgentKind {
        AgentKind::Qlearning
    }

    fn act(&self, state: &GridState, config: &GridConfig, _rng: &mut SimRng) -> GridAction {
        let a = self.q.best_action(self.scheme.discretize(state));
        self.scheme.actions[a].to_action(state, config)
    }

    fn check_compatible(&self, config: &GridConfig) -> Result<(), ConfigError> {
        check_templates(&self.scheme.actions, config)?;
        if self.q.n_states() != self.scheme.n_states() || self.q.n_actions() != self.scheme.n_actions() {
            return Err(ConfigError::Dimension("Q-table does not match its discretization".into()));
        }
        Ok(())
    }
}

/// Greedy action from a Q-network.
#[derive(Debug, Clone, PartialEq)]
pub struct DqnPolicy {
    pub network: Network,
    pub templates: Vec<ActionTemplate>,
    pub scales: FeatureScales,
}

impl GridPolicy for DqnPolicy {
    fn kind(&self) -> AgentKind {
        AgentKind::Dqn
    }

    fn act(&self, state: &GridState, config: &GridConfig, _rng: &mut SimRng) -> GridAction {
        let a = argmax(&self.network.forward(&self.scales.apply(state)));
        self.templates[a].to_action(state, config)
    }

    fn check_compatible(&self, config: &GridConfig) -> Result<(), ConfigError> {
        check_network(&self.network, &self.scales, &self.templates, config)
    }
}

/// Mode of the actor's softmax policy. The critic is kept for persistence only.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCriticPolicy {
    pub actor: Network,
    pub critic: Network,
    pub templates: Vec<ActionTemplate>,
    pub scales: FeatureScales,
}

impl GridPolicy for ActorCriticPolicy {
    fn kind(&self) -> AgentKind {
        AgentKind::ActorCritic
    }

    fn act(&self, state: &GridState, config: &GridConfig, _rng: &mut SimRng) -> GridAction {
        let a = argmax(&self.actor.forward(&self.scales.apply(state)));
        self.templates[a].to_action(state, config)
    }

    fn check_compatible(&self, config: &GridConfig) -> Result<(), ConfigError> {
        check_network(&self.actor, &self.scales, &self.templates, config)?;
        check_network(&self.critic, &self.scales, &self.templates, config)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PriorityListPolicy;

impl GridPolicy for PriorityListPolicy {
    fn kind(&self) -> AgentKind {
        AgentKind::PriorityList
    }

    fn act(&self, state: &GridState, config: &GridConfig, _rng: &mut SimRng) -> GridAction {
        priority_list_dispatch(state, config)
    }

    fn check_compatible(&self, _config: &GridConfig) -> Result<(), ConfigError> {
        Ok(())
    }
}

/// Uniform choice over the action templates.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomPolicy {
    pub templates: Vec<ActionTemplate>,
}

impl GridPolicy for RandomPolicy {
    fn kind(&self) -> AgentKind {
        AgentKind::Random
    }

    fn act(&self, state: &GridState, config: &GridConfig, rng: &mut SimRng) -> GridAction {
        random_policy(state, &self.templates, config, rng)
    }

    fn check_compatible(&self, config: &GridConfig) -> Result<(), ConfigError> {
        check_templates(&self.templates, config)
    }
}

/// Any of the five policy kinds, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentPolicy {
    Tabular(TabularPolicy),
    Dqn(DqnPolicy),
    ActorCritic(ActorCriticPolicy),
    PriorityList(PriorityListPolicy),
    Random(RandomPolicy),
}

impl AgentPolicy {
    fn inner(&self) -> &dyn GridPolicy {
        match self {
            AgentPolicy::Tabular(p) => p,
            AgentPolicy::Dqn(p) => p,
            AgentPolicy::ActorCritic(p) => p,
            AgentPolicy::PriorityList(p) => p,
            AgentPolicy::Random(p) => p,
        }
    }
}

impl GridPolicy for AgentPolicy {
    fn kind(&self) -> AgentKind {
        self.inner().kind()
    }

    fn act(&self, state: &GridState, config: &GridConfig, rng: &mut SimRng) -> GridAction {
        self.inner().act(state, config, rng)
    }

    fn check_compatible(&self, config: &GridConfig) -> Result<(), ConfigError> {
        self.inner().check_compatible(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_network;
    use crate::tabular::action_templates;

    #[test]
    fn agent_names_round_trip() {
        for k in AgentKind::ALL {
            assert_eq!(k.name().parse::<AgentKind>().unwrap(), k);
            assert_eq!(AgentKind::from_code(k.code()), Some(k));
        }
        assert!("sarsa".parse::<AgentKind>().unwrap_err().contains("sarsa"));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let config = GridConfig::small_grid();
        let templates = action_templates(&config, 0.1);
        let scales = FeatureScales::from_config(&config);
        let good = DqnPolicy {
            network: init_network(&[scales.len(), 8, templates.len()], 1).unwrap(),
            templates: templates.clone(),
            scales: scales.clone(),
        };
        assert!(good.check_compatible(&config).is_ok());

        let mut one_unit = config.clone();
        one_unit.generators.truncate(1);
        assert!(matches!(good.check_compatible(&one_unit), Err(ConfigError::Dimension(_))));

        let bad = DqnPolicy {
            network: init_network(&[scales.len(), 8, 5], 1).unwrap(),
            templates,
            scales,
        };
        assert!(bad.check_compatible(&config).is_err());
    }
}
