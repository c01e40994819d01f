use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::molgraph::Molecule;
use crate::oracle::{LabelCache, Oracle, OracleError, UNSOLVED};
use crate::spaces::{random_molecule, SearchSpace};
use crate::surrogate::{cross_validate, CvReport, SurrogateError, SurrogateModel, Task, TrainConfig};

use super::{r_squared, roc_auc, EvalError, RocCurve};

/// Random actions per sampled molecule are drawn uniformly from
/// `0..=MAX_INIT_ACTIONS`.
pub const MAX_INIT_ACTIONS: usize = 20;
/// Smallest sample the fidelity experiment accepts.
pub const MIN_FIDELITY_N: usize = 1000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment needs at least {needed} molecules, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `n` random molecules; molecule `i` uses its own generator stream so the
/// sample does not depend on scheduling.
pub fn sample_molecules(space: &SearchSpace, n: usize, seed: u64) -> Vec<Molecule> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let n_init = rng.random_range(0..=MAX_INIT_ACTIONS);
            random_molecule(space, &mut rng, n_init)
        })
        .collect()
}

/// Samples and labels `n` molecules with the oracle.
pub fn labeled_sample(
    space: &SearchSpace,
    oracle: &Oracle,
    cache: &mut LabelCache,
    n: usize,
    seed: u64,
) -> Result<Vec<(Molecule, f64)>, ExperimentError> {
    let mols = sample_molecules(space, n, seed);
    let labels = oracle.label_batch(&mols, cache)?;
    Ok(mols.into_iter().zip(labels).map(|(m, (_, c))| (m, c.value())).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterPoint {
    pub smiles: String,
    pub oracle: f64,
    pub predicted: f64,
    pub route_probability: f64,
}

/// Agreement between oracle labels and surrogate outputs.
#[derive(Debug, Clone, Serialize)]
pub struct FidelityMetrics {
    pub n: usize,
    pub unsolved_fraction: f64,
    /// R² over every out-of-fold prediction together.
    pub r2_pooled: Option<f64>,
    /// AUC of the route probability for "a route exists".
    pub auc_pooled: Option<f64>,
    pub roc: Option<RocCurve>,
}

impl FidelityMetrics {
    pub fn compute(oracle: &[f64], predicted: &[f64], route_probability: &[f64]) -> Result<FidelityMetrics, EvalError> {
        if oracle.len() != predicted.len() || oracle.len() != route_probability.len() {
            return Err(EvalError::Length { left: oracle.len(), right: predicted.len().min(route_probability.len()) });
        }
        let labels: Vec<bool> = oracle.iter().map(|&s| s < UNSOLVED).collect();
        let roc = roc_auc(route_probability, &labels).ok();
        Ok(FidelityMetrics {
            n: oracle.len(),
            unsolved_fraction: labels.iter().filter(|&&l| !l).count() as f64 / oracle.len().max(1) as f64,
            r2_pooled: r_squared(oracle, predicted).ok(),
            auc_pooled: roc.as_ref().map(|r| r.auc),
            roc,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityReport {
    pub metrics: FidelityMetrics,
    /// Mean of per-fold held-out metrics.
    pub r2_mean_fold: Option<f64>,
    pub auc_mean_fold: Option<f64>,
    pub regression: CvReport,
    pub classification: CvReport,
    pub scatter: Vec<ScatterPoint>,
}

/// Cross-validates regression and classification surrogates on labeled
/// data and compares out-of-fold outputs with the labels.
pub fn fidelity_from_data(data: &[(Molecule, f64)], config: &TrainConfig) -> Result<FidelityReport, ExperimentError> {
    let regression = cross_validate(config, Task::Regression, data)?;
    let classification = cross_validate(config, Task::Classification, data)?;
    let oracle: Vec<f64> = data.iter().map(|(_, s)| *s).collect();
    let metrics = FidelityMetrics::compute(&oracle, &regression.predictions, &classification.predictions)?;
    let scatter = data
        .iter()
        .zip(regression.predictions.iter().zip(&classification.predictions))
        .map(|((m, s), (&p, &q))| ScatterPoint {
            smiles: m.canonical_smiles().to_string(),
            oracle: *s,
            predicted: p,
            route_probability: q,
        })
        .collect();
    Ok(FidelityReport {
        metrics,
        r2_mean_fold: regression.mean_fold_metric(),
        auc_mean_fold: classification.mean_fold_metric(),
        regression,
        classification,
        scatter,
    })
}

/// Samples `n` molecules from `space`, labels them with the oracle and runs
/// [`fidelity_from_data`].
pub fn fidelity_experiment(
    space: &SearchSpace,
    oracle: &Oracle,
    cache: &mut LabelCache,
    config: &TrainConfig,
    n: usize,
    seed: u64,
) -> Result<FidelityReport, ExperimentError> {
    if n < MIN_FIDELITY_N {
        return Err(ExperimentError::TooSmall { needed: MIN_FIDELITY_N, got: n });
    }
    let data = labeled_sample(space, oracle, cache, n, seed)?;
    fidelity_from_data(&data, config)
}

/// R² of a trained regression model on labeled molecules, such as a set
/// drawn from a different space.
pub fn holdout_r2(model: &SurrogateModel, data: &[(Molecule, f64)]) -> Result<f64, ExperimentError> {
    let mols: Vec<Molecule> = data.iter().map(|(m, _)| m.clone()).collect();
    let y: Vec<f64> = data.iter().map(|(_, s)| *s).collect();
    Ok(r_squared(&y, &model.predict_batch(&mols)?)?)
}
