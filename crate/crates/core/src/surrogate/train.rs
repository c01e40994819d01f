use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{FeatureSchema, GraphFeatures};
use super::net::Tensor;
use super::{Hyperparams, SurrogateError, SurrogateModel, Task};
use crate::evalkit::{kfold, r_squared, roc_auc, EvalError};
use crate::molgraph::Molecule;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// Fraction of the training part held out for early stopping.
const VALIDATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub k: usize,
    /// Epochs without validation improvement before stopping; 0 trains for
    /// every epoch without a validation split.
    pub patience: usize,
    pub hidden: usize,
    pub depth: usize,
    pub dropout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let h = Hyperparams::default();
        TrainConfig {
            epochs: 50,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 0,
            k: 5,
            patience: 0,
            hidden: h.hidden,
            depth: h.depth,
            dropout: h.dropout,
        }
    }
}

impl TrainConfig {
    pub fn hyper(&self) -> Hyperparams {
        Hyperparams { hidden: self.hidden, depth: self.depth, dropout: self.dropout }
    }

    pub fn validate(&self) -> Result<(), SurrogateError> {
        let bad = |m: &str| Err(SurrogateError::Config(m.to_string()));
        if self.k < 2 {
            return bad("k must be at least 2");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 || self.hidden == 0 {
            return bad("batch size and hidden width must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        Ok(())
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(params: &[Tensor], lr: f64) -> Adam {
        let zeros = || params.iter().map(|p| vec![0.0; p.data.len()]).collect();
        Adam { m: zeros(), v: zeros(), t: 0, lr }
    }

    fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            for (i, (w, &d)) in p.data.iter_mut().zip(&g.data).enumerate() {
                let m = &mut self.m[k][i];
                let v = &mut self.v[k][i];
                *m = BETA1 * *m + (1.0 - BETA1) * d;
                *v = BETA2 * *v + (1.0 - BETA2) * d * d;
                *w -= self.lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
            }
        }
    }
}

fn mean_loss(model: &SurrogateModel, graphs: &[&GraphFeatures], targets: &[f64], chunk: usize) -> f64 {
    let mut total = 0.0;
    for (g, t) in graphs.chunks(chunk).zip(targets.chunks(chunk)) {
        let (loss, _) = model
            .loss_and_grad::<ChaCha8Rng>(&model.batch(g), t, None)
            .unwrap_or((f64::INFINITY, Vec::new()));
        total += loss * g.len() as f64;
    }
    total / graphs.len() as f64
}

/// Trains one model on already featurized graphs with raw oracle scores.
fn fit_features(
    config: &TrainConfig,
    task: Task,
    schema: &FeatureSchema,
    graphs: &[&GraphFeatures],
    scores: &[f64],
) -> Result<SurrogateModel, SurrogateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = SurrogateModel::new(task, config.hyper(), schema.clone(), &mut rng);
    let targets: Vec<f64> = scores.iter().map(|&s| task.target(s)).collect();

    let mut order: Vec<usize> = (0..graphs.len()).collect();
    order.shuffle(&mut rng);
    let n_val = if config.patience > 0 { (graphs.len() as f64 * VALIDATION_FRACTION).floor() as usize } else { 0 };
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();

    if task == Task::Regression {
        let n = train_idx.len() as f64;
        let mean = train_idx.iter().map(|&i| targets[i]).sum::<f64>() / n;
        let var = train_idx.iter().map(|&i| (targets[i] - mean).powi(2)).sum::<f64>() / n;
        model.target_shift = mean;
        model.target_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    }

    let val_graphs: Vec<&GraphFeatures> = val_idx.iter().map(|&i| graphs[i]).collect();
    let val_targets: Vec<f64> = val_idx.iter().map(|&i| targets[i]).collect();
    let mut best = (f64::INFINITY, model.clone());
    let mut stale = 0;
    let mut adam = Adam::new(&model.params, config.learning_rate);
    for epoch in 0..config.epochs {
        let last_good = model.clone();
        train_idx.shuffle(&mut rng);
        for chunk in train_idx.chunks(config.batch_size) {
            let g: Vec<&GraphFeatures> = chunk.iter().map(|&i| graphs[i]).collect();
            let t: Vec<f64> = chunk.iter().map(|&i| targets[i]).collect();
            let batch = model.batch(&g);
            let step = model.loss_and_grad(&batch, &t, Some(&mut rng));
            let Ok((_, grads)) = step else {
                return Err(SurrogateError::Diverged { epoch, last_good: Box::new(last_good) });
            };
            adam.step(&mut model.params, &grads);
        }
        if !model.is_finite() {
            return Err(SurrogateError::Diverged { epoch, last_good: Box::new(last_good) });
        }
        if n_val > 0 {
            let loss = mean_loss(&model, &val_graphs, &val_targets, 256);
            if loss < best.0 {
                best = (loss, model.clone());
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.patience {
                    break;
                }
            }
        }
    }
    Ok(if n_val > 0 { best.1 } else { model })
}

fn featurize_all(schema: &FeatureSchema, mols: &[Molecule]) -> Result<Vec<GraphFeatures>, SurrogateError> {
    mols.iter().map(|m| schema.featurize(m).map_err(SurrogateError::Element)).collect()
}

/// One fold's held-out metric: R² for regression, ROC AUC for
/// classification. `None` when undefined (zero variance or one class).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldMetric {
    pub fold: usize,
    pub n: usize,
    pub metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub task: Task,
    pub folds: Vec<FoldMetric>,
    /// Metric over all out-of-fold predictions together.
    pub pooled: Option<f64>,
    /// Out-of-fold prediction for every record, in input order; clamped to
    /// [1, 11] for regression.
    pub predictions: Vec<f64>,
    pub warnings: Vec<String>,
}

impl CvReport {
    pub fn mean_fold_metric(&self) -> Option<f64> {
        let v: Vec<f64> = self.folds.iter().filter_map(|f| f.metric).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn metric(task: Task, scores: &[f64], preds: &[f64]) -> Result<f64, EvalError> {
    match task {
        Task::Regression => r_squared(scores, preds),
        Task::Classification => {
            let labels: Vec<bool> = scores.iter().map(|&s| task.target(s) == 1.0).collect();
            roc_auc(preds, &labels).map(|c| c.auc)
        }
    }
}

/// k-fold cross-validation: each fold is predicted by a model trained on
/// the others. Folds train independently and in parallel; results do not
/// depend on the worker count.
pub fn cross_validate(
    config: &TrainConfig,
    task: Task,
    data: &[(Molecule, f64)],
) -> Result<CvReport, SurrogateError> {
    config.validate()?;
    if data.len() < 10 * config.k {
        return Err(SurrogateError::Config(format!(
            "{} records is fewer than 10 per fold for k = {}",
            data.len(),
            config.k
        )));
    }
    let schema = FeatureSchema::default();
    let mols: Vec<Molecule> = data.iter().map(|(m, _)| m.clone()).collect();
    let scores: Vec<f64> = data.iter().map(|(_, s)| *s).collect();
    let feats = featurize_all(&schema, &mols)?;
    let folds = kfold(data.len(), config.k, config.seed).expect("fold count checked above");

    let fold_preds: Vec<Result<Vec<f64>, SurrogateError>> = (0..config.k)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..config.k).filter(|&o| o != f).flat_map(|o| folds[o].clone()).collect();
            let g: Vec<&GraphFeatures> = train_idx.iter().map(|&i| &feats[i]).collect();
            let s: Vec<f64> = train_idx.iter().map(|&i| scores[i]).collect();
            let fold_config = TrainConfig { seed: config.seed.wrapping_add(1 + f as u64), ..config.clone() };
            let model = fit_features(&fold_config, task, &schema, &g, &s)?;
            let held: Vec<Molecule> = folds[f].iter().map(|&i| mols[i].clone()).collect();
            model.predict_batch(&held)
        })
        .collect();

    let mut predictions = vec![0.0; data.len()];
    let mut report_folds = Vec::with_capacity(config.k);
    let mut warnings = Vec::new();
    for (f, preds) in fold_preds.into_iter().enumerate() {
        let preds = preds?;
        let held_scores: Vec<f64> = folds[f].iter().map(|&i| scores[i]).collect();
        for (&i, &p) in folds[f].iter().zip(&preds) {
            predictions[i] = p;
        }
        let m = metric(task, &held_scores, &preds);
        if let Err(e) = &m {
            warnings.push(format!("fold {f}: metric not applicable ({e})"));
        }
        report_folds.push(FoldMetric { fold: f, n: preds.len(), metric: m.ok() });
    }
    let pooled = metric(task, &scores, &predictions);
    if let Err(e) = &pooled {
        warnings.push(format!("pooled metric not applicable ({e})"));
    }
    Ok(CvReport { task, folds: report_folds, pooled: pooled.ok(), predictions, warnings })
}

/// Trains on all records (no cross-validation).
pub fn fit(config: &TrainConfig, task: Task, data: &[(Molecule, f64)]) -> Result<SurrogateModel, SurrogateError> {
    config.validate()?;
    let schema = FeatureSchema::default();
    let mols: Vec<Molecule> = data.iter().map(|(m, _)| m.clone()).collect();
    let feats = featurize_all(&schema, &mols)?;
    let g: Vec<&GraphFeatures> = feats.iter().collect();
    let s: Vec<f64> = data.iter().map(|(_, s)| *s).collect();
    fit_features(config, task, &schema, &g, &s)
}

/// Cross-validates, then trains the final model on all records.
pub fn train(
    config: &TrainConfig,
    task: Task,
    data: &[(Molecule, f64)],
) -> Result<(SurrogateModel, CvReport), SurrogateError> {
    let report = cross_validate(config, task, data)?;
    let model = fit(config, task, data)?;
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub hyper: Hyperparams,
    pub pooled: Option<f64>,
}

/// Cross-validates every hyperparameter combination; returns all points and
/// the index of the best pooled metric (first wins ties).
pub fn grid_search(
    config: &TrainConfig,
    task: Task,
    data: &[(Molecule, f64)],
    grid: &[Hyperparams],
) -> Result<(Vec<GridPoint>, Option<usize>), SurrogateError> {
    let mut points = Vec::with_capacity(grid.len());
    for &hyper in grid {
        let c = TrainConfig { hidden: hyper.hidden, depth: hyper.depth, dropout: hyper.dropout, ..config.clone() };
        let report = cross_validate(&c, task, data)?;
        points.push(GridPoint { hyper, pooled: report.pooled });
    }
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if let Some(v) = p.pooled {
            if best.is_none_or(|b| v > points[b].pooled.unwrap_or(f64::NEG_INFINITY)) {
                best = Some(i);
            }
        }
    }
    Ok((points, best))
}

/// Reads a labeled dataset CSV with header `smiles,score`.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>, SurrogateError> {
    let path = path.as_ref();
    let bad = |line: usize, reason: String| SurrogateError::Dataset { path: path.to_path_buf(), line, reason };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(0, e.to_string()))?;
    let mut rows = Vec::new();
    for (k, record) in rdr.deserialize().enumerate() {
        let (smiles, score): (String, f64) = record.map_err(|e| bad(k + 2, e.to_string()))?;
        if !score.is_finite() {
            return Err(bad(k + 2, format!("score {score} is not finite")));
        }
        rows.push((smiles, score));
    }
    Ok(rows)
}

pub fn write_dataset(path: impl AsRef<Path>, rows: &[(String, f64)]) -> Result<(), SurrogateError> {
    let mut out = String::from("smiles,score\n");
    for (s, v) in rows {
        out.push_str(&format!("{s},{v}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}
