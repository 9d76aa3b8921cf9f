use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("P[{state}][{action}] is not a probability distribution (sum {sum})")]
    NotDistribution { state: usize, action: usize, sum: f64 },
    #[error("discount {0} unsupported, need 0 <= gamma < 1")]
    UnsupportedGamma(f64),
    #[error("tolerance must be > 0")]
    Tolerance,
}

/// Finite MDP with explicit transition tensor `transition[s][a][s']` and reward table `reward[s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<Vec<Vec<f64>>>,
    reward: Vec<Vec<f64>>,
    gamma: f64,
}

impl TabularMdp {
    pub fn new(transition: Vec<Vec<Vec<f64>>>, reward: Vec<Vec<f64>>, gamma: f64) -> Result<Self, MdpError> {
        let n_states = transition.len();
        if n_states == 0 || reward.len() != n_states {
            return Err(MdpError::Shape("need matching, non-empty state dimensions".into()));
        }
        let n_actions = transition[0].len();
        if n_actions == 0 {
            return Err(MdpError::Shape("need at least one action".into()));
        }
        for (s, row) in transition.iter().enumerate() {
            if row.len() != n_actions || reward[s].len() != n_actions {
                return Err(MdpError::Shape(format!("state {s} has inconsistent action count")));
            }
            for (a, dist) in row.iter().enumerate() {
                if dist.len() != n_states {
                    return Err(MdpError::Shape(format!("P[{s}][{a}] has wrong length")));
                }
                let sum: f64 = dist.iter().sum();
                let in_range = dist.iter().all(|&p| (0.0..=1.0).contains(&p));
                if !in_range || (sum - 1.0).abs() > 1e-12 {
                    return Err(MdpError::NotDistribution { state: s, action: a, sum });
                }
            }
            if reward[s].iter().any(|r| !r.is_finite()) {
                return Err(MdpError::Shape(format!("R[{s}] has non-finite entries")));
            }
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(MdpError::UnsupportedGamma(gamma));
        }
        Ok(Self {
            n_states,
            n_actions,
            transition,
            reward,
            gamma,
        })
    }

    /// Deterministic MDP from a successor table `next[s][a]`.
    pub fn deterministic(next: &[Vec<usize>], reward: Vec<Vec<f64>>, gamma: f64) -> Result<Self, MdpError> {
        let n = next.len();
        let transition = next
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&s2| {
                        let mut d = vec![0.0; n];
                        if s2 < n {
                            d[s2] = 1.0;
                        }
                        d
                    })
                    .collect()
            })
            .collect();
        Self::new(transition, reward, gamma)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s][a]
    }

    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        &self.transition[s][a]
    }

    /// Same dynamics under a different discount.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self, MdpError> {
        Self::new(self.transition.clone(), self.reward.clone(), gamma)
    }

    fn bellman(&self, q: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let v: Vec<f64> = q.iter().map(|row| row_max(row)).collect();
        (0..self.n_states)
            .map(|s| {
                (0..self.n_actions)
                    .map(|a| {
                        let expected: f64 = self.transition[s][a].iter().zip(&v).map(|(p, v)| p * v).sum();
                        self.reward[s][a] + self.gamma * expected
                    })
                    .collect()
            })
            .collect()
    }
}

/// A state-to-action mapping.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Deterministic(Vec<usize>),
    Stochastic(Vec<Vec<f64>>),
}

impl Policy {
    /// Most likely action in each state (lowest index on ties).
    pub fn mode(&self) -> Vec<usize> {
        match self {
            Policy::Deterministic(a) => a.clone(),
            Policy::Stochastic(d) => d.iter().map(|row| argmax(row)).collect(),
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Policy::Deterministic(_) => true,
            Policy::Stochastic(d) => d
                .iter()
                .all(|row| row.iter().all(|&p| (0.0..=1.0).contains(&p)) && (row.iter().sum::<f64>() - 1.0).abs() <= 1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIteration {
    pub v: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub policy: Policy,
    /// Bellman sweeps performed.
    pub sweeps: usize,
}

/// Iterate the Bellman optimality operator, starting from `Q = R`, until the
/// sup-norm residual drops below `tol`.
pub fn value_iteration(mdp: &TabularMdp, tol: f64) -> Result<ValueIteration, MdpError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(MdpError::Tolerance);
    }
    if mdp.gamma >= 1.0 {
        return Err(MdpError::UnsupportedGamma(mdp.gamma));
    }
    let mut q = mdp.reward.clone();
    let mut sweeps = 0;
    loop {
        let next = mdp.bellman(&q);
        sweeps += 1;
        let residual = sup_distance(&next, &q);
        q = next;
        if residual < tol {
            break;
        }
    }
    let v = q.iter().map(|row| row_max(row)).collect();
    let policy = greedy_policy(&q);
    Ok(ValueIteration { v, q, policy, sweeps })
}

/// `sum_t gamma^t r_t`.
pub fn episode_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    total
}

/// Greedy policy over a Q table, ties broken toward the lowest action index.
pub fn greedy_policy<R: AsRef<[f64]>>(q: &[R]) -> Policy {
    Policy::Deterministic(q.iter().map(|row| argmax(row.as_ref())).collect())
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn row_max(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn sup_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
