use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::molgraph::Molecule;
use crate::oracle::{LabelCache, Oracle};
use crate::scoring::Scorer;
use crate::spaces::{apply_action, enumerate_actions, random_molecule, Action, SearchSpace};

use super::{softmax_probs, OptimizerError, RunConfig, SearchReport, StepRecord, TopK, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Boltzmann selection at temperature τ over scored successors.
    Softmax { temperature: f64 },
    /// Uniform selection; successors are not scored.
    Uniform,
}

/// Generator for trajectory `id`: the master seed picks the key and the id
/// picks the stream, so every trajectory is independent of scheduling.
pub fn trajectory_rng(seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `acc` slightly below 1; take the last nonzero entry.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

#[cfg(test)]
pub(crate) fn sample_for_tests<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    sample_index(probs, rng)
}

/// Runs one trajectory from a random starting molecule. Failures end the
/// trajectory and are stored in `error` alongside the partial record.
pub fn run_trajectory<R: Rng + ?Sized>(
    id: usize,
    space: &SearchSpace,
    scorer: &Scorer,
    cfg: &RunConfig,
    policy: Policy,
    rng: &mut R,
) -> Trajectory {
    let mut traj = Trajectory { id, records: Vec::with_capacity(cfg.steps + 1), dead_end: false, error: None };
    if let Err(e) = walk(&mut traj, space, scorer, cfg, policy, rng) {
        traj.error = Some(e.to_string());
    }
    traj
}

fn walk<R: Rng + ?Sized>(
    traj: &mut Trajectory,
    space: &SearchSpace,
    scorer: &Scorer,
    cfg: &RunConfig,
    policy: Policy,
    rng: &mut R,
) -> Result<(), OptimizerError> {
    let mut mol = random_molecule(space, rng, cfg.n_init);
    let mut score = scorer.score(&mol)?;
    let mut action_name = None;
    for step in 0..=cfg.steps {
        let mut actions = enumerate_actions(space, &mol);
        traj.records.push(StepRecord {
            step,
            smiles: mol.canonical_smiles().to_string(),
            score,
            action: action_name.take(),
            action_count: actions.len(),
        });
        if step == cfg.steps {
            break;
        }
        if actions.is_empty() {
            traj.dead_end = true;
            break;
        }
        match policy {
            Policy::Softmax { temperature } => {
                if actions.len() > cfg.max_actions {
                    let mut keep = index::sample(rng, actions.len(), cfg.max_actions).into_vec();
                    keep.sort_unstable();
                    actions = keep.into_iter().map(|i| actions[i]).collect();
                }
                let successors =
                    actions.iter().map(|a| apply_action(space, &mol, a)).collect::<Result<Vec<Molecule>, _>>()?;
                let scores = scorer.score_batch(&successors)?;
                let q: Vec<f64> = scores.iter().map(|s| -s.combined).collect();
                let pick = sample_index(&softmax_probs(&q, temperature)?, rng);
                mol = successors.into_iter().nth(pick).expect("index in range");
                score = scores[pick];
                action_name = Some(actions[pick].to_string());
            }
            Policy::Uniform => {
                let action: Action = actions[rng.random_range(0..actions.len())];
                mol = apply_action(space, &mol, &action)?;
                score = scorer.score(&mol)?;
                action_name = Some(action.to_string());
            }
        }
    }
    Ok(())
}

fn run_policy(space: &SearchSpace, scorer: &Scorer, cfg: &RunConfig, policy: Policy) -> Result<SearchReport, OptimizerError> {
    cfg.validate()?;
    let trajectories: Vec<Trajectory> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|id| run_trajectory(id, space, scorer, cfg, policy, &mut trajectory_rng(cfg.seed, id)))
        .collect();

    let mut top = TopK::new(cfg.top_k);
    let mut best_curve = Vec::new();
    let mut best = f64::INFINITY;
    let mut visited = 0;
    let mut errors = Vec::new();
    for t in &trajectories {
        for r in &t.records {
            visited += 1;
            best = best.min(r.score.combined);
            best_curve.push((visited, best));
            top.offer(&r.smiles, r.score);
        }
        if let Some(e) = &t.error {
            errors.push(format!("trajectory {}: {e}", t.id));
        }
    }
    Ok(SearchReport { trajectories, best_curve, top: top.into_rows(), scored: visited, parse_errors: 0, errors })
}

/// Softmax search: `n_trajectories` independent trajectories, top-k over
/// every visited molecule.
pub fn run_search(space: &SearchSpace, scorer: &Scorer, cfg: &RunConfig) -> Result<SearchReport, OptimizerError> {
    run_policy(space, scorer, cfg, Policy::Softmax { temperature: cfg.temperature })
}

/// Same machinery with uniform action choice.
pub fn random_walk_baseline(space: &SearchSpace, scorer: &Scorer, cfg: &RunConfig) -> Result<SearchReport, OptimizerError> {
    run_policy(space, scorer, cfg, Policy::Uniform)
}

/// Fills `oracle_cost` for every top-k row with the slow planner.
pub fn relabel_top(report: &mut SearchReport, oracle: &Oracle, cache: &mut LabelCache) -> Result<(), OptimizerError> {
    let mols = report
        .top
        .iter()
        .map(|r| crate::molgraph::parse_smiles(&r.smiles))
        .collect::<Result<Vec<_>, _>>()?;
    let labels = oracle.label_batch(&mols, cache)?;
    for (row, (_, cost)) in report.top.iter_mut().zip(labels) {
        row.oracle_cost = Some(cost.value());
    }
    Ok(())
}
