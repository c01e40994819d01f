//! Boltzmann softmax search over a space, with the random-walk and
//! library-screening baselines.
//!
//! Sign convention: the combined score is minimized, so the action value fed
//! to the softmax is `Q = −combined(successor)`.

mod output;
mod screen;
mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::MolError;
use crate::oracle::OracleError;
use crate::scoring::{ScoreBundle, ScoreError};
use crate::spaces::SpaceError;

pub use output::{write_best_curve, write_topk, write_trajectories};
pub use screen::screen_library;
pub use search::{random_walk_baseline, relabel_top, run_search, run_trajectory, trajectory_rng, Policy};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("softmax over an empty action set")]
    EmptyActions,
    #[error("bad run config: {0}")]
    Config(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Mol(#[from] MolError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub temperature: f64,
    pub steps: usize,
    /// Random actions used to build each starting molecule; not counted
    /// among `steps`.
    pub n_init: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub space: String,
    /// Larger action sets are uniformly subsampled to this size.
    pub max_actions: usize,
    pub top_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            temperature: 0.15,
            steps: 200,
            n_init: 20,
            n_trajectories: 1000,
            seed: 0,
            space: "frag105".into(),
            max_actions: 2000,
            top_k: 100,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::Config(m.to_string()));
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive and finite");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if self.max_actions == 0 {
            return bad("max_actions must be at least 1");
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        Ok(())
    }
}

/// Boltzmann probabilities `exp(q_i/τ) / Σ exp(q_j/τ)`, computed with the
/// maximum shifted out.
pub fn softmax_probs(q: &[f64], tau: f64) -> Result<Vec<f64>, OptimizerError> {
    if q.is_empty() {
        return Err(OptimizerError::EmptyActions);
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(OptimizerError::Config("temperature must be positive".into()));
    }
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = q.iter().map(|&x| ((x - max) / tau).exp()).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub smiles: String,
    pub score: ScoreBundle,
    /// Action that produced this state; `None` for the starting molecule.
    pub action: Option<String>,
    /// Legal actions available from this state before subsampling.
    pub action_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: usize,
    pub records: Vec<StepRecord>,
    /// Stopped early at a state without legal actions.
    pub dead_end: bool,
    /// Scorer or space failure that cut the trajectory short.
    pub error: Option<String>,
}

impl Trajectory {
    pub fn best(&self) -> Option<&StepRecord> {
        self.records.iter().min_by(|a, b| a.score.rank_cmp(&b.score))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopRow {
    pub rank: usize,
    pub smiles: String,
    pub score: ScoreBundle,
    pub sa_raw: f64,
    /// Planner cost, when the row was relabeled with the oracle.
    pub oracle_cost: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub trajectories: Vec<Trajectory>,
    /// `(molecules visited, lowest combined so far)`, trajectories taken in
    /// id order.
    pub best_curve: Vec<(usize, f64)>,
    pub top: Vec<TopRow>,
    /// Molecules scored (screening) or states visited (search).
    pub scored: usize,
    /// Unparseable or unscorable library lines.
    pub parse_errors: usize,
    pub errors: Vec<String>,
}

impl SearchReport {
    /// Ids of the `n` trajectories with the best visited score.
    pub fn top_trajectories(&self, n: usize) -> Vec<usize> {
        let mut ids: Vec<(usize, &StepRecord)> =
            self.trajectories.iter().filter_map(|t| t.best().map(|b| (t.id, b))).collect();
        ids.sort_by(|a, b| a.1.score.rank_cmp(&b.1.score).then(a.0.cmp(&b.0)));
        ids.into_iter().take(n).map(|(id, _)| id).collect()
    }
}

/// Bounded best-first table keyed by canonical SMILES.
#[derive(Debug, Clone)]
pub(crate) struct TopK {
    k: usize,
    rows: Vec<(String, ScoreBundle)>,
}

impl TopK {
    pub(crate) fn new(k: usize) -> TopK {
        TopK { k, rows: Vec::with_capacity(k + 1) }
    }

    pub(crate) fn offer(&mut self, smiles: &str, score: ScoreBundle) {
        let full = self.rows.len() == self.k;
        if full && score.rank_cmp(&self.rows[self.k - 1].1).then_with(|| smiles.cmp(&self.rows[self.k - 1].0)).is_ge() {
            return;
        }
        if self.rows.iter().any(|(s, _)| s == smiles) {
            return;
        }
        let at = self
            .rows
            .partition_point(|(s, b)| b.rank_cmp(&score).then_with(|| s.as_str().cmp(smiles)).is_lt());
        self.rows.insert(at, (smiles.to_string(), score));
        self.rows.truncate(self.k);
    }

    pub(crate) fn into_rows(self) -> Vec<TopRow> {
        self.rows
            .into_iter()
            .enumerate()
            .map(|(i, (smiles, score))| {
                let mol = crate::molgraph::parse_smiles(&smiles).expect("canonical SMILES parses");
                let sa_raw = crate::scoring::sa_heuristic(&mol);
                TopRow { rank: i + 1, smiles, score, sa_raw, oracle_cost: None }
            })
            .collect()
    }
}
