use serde::{Deserialize, Serialize};

use crate::grid::EnvError;
use crate::mdp::EpisodicEnv;
use crate::stochastic::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Training episodes completed when the evaluation ran.
    pub episode: usize,
    pub mean_return: f64,
    pub mean_cost: f64,
}

/// Periodic greedy-evaluation results recorded during training.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a point. Episode indices must be strictly increasing.
    pub fn push(&mut self, point: CurvePoint) {
        if let Some(last) = self.points.last() {
            assert!(point.episode > last.episode, "learning curve episodes must increase");
        }
        self.points.push(point);
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn returns(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_return).collect()
    }

    /// CSV with header `episode,return,cost`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,return,cost\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.episode, p.mean_return, p.mean_cost));
        }
        out
    }
}

/// Earliest evaluation episode from which every `window`-long run of
/// consecutive evaluation returns stays within `band * |mean|` of its own mean.
pub fn detect_convergence(curve: &LearningCurve, window: usize, band: f64) -> Option<usize> {
    assert!(window >= 2, "convergence window must be at least 2");
    let returns = curve.returns();
    if returns.len() < window {
        return None;
    }
    let stable: Vec<bool> = returns
        .windows(window)
        .map(|w| {
            let mean = w.iter().sum::<f64>() / window as f64;
            let tol = band * mean.abs();
            w.iter().all(|r| (r - mean).abs() <= tol)
        })
        .collect();
    // Walk back from the last window while every later window is stable.
    let mut start = None;
    for (i, &ok) in stable.iter().enumerate().rev() {
        if ok {
            start = Some(i);
        } else {
            break;
        }
    }
    start.map(|i| curve.points()[i].episode)
}

/// Mean undiscounted return and cost of `n` episodes run with a fixed action
/// rule. Episode `k` is reset with `stream.split_index(k)`.
pub fn rollout_means<E, F>(env: &mut E, stream: &SimRng, n: usize, mut choose: F) -> Result<(f64, f64), EnvError>
where
    E: EpisodicEnv,
    F: FnMut(&E, &E::Obs) -> usize,
{
    let mut total_return = 0.0;
    let mut total_cost = 0.0;
    for k in 0..n {
        let mut obs = env.reset(stream.split_index(k as u64));
        loop {
            let a = choose(env, &obs);
            let step = env.step(a)?;
            total_return += step.reward;
            total_cost += step.cost;
            if step.ends_episode() {
                break;
            }
            obs = step.obs;
        }
    }
    let n = n.max(1) as f64;
    Ok((total_return / n, total_cost / n))
}
