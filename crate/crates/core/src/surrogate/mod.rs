//! Message passing surrogate of the oracle: regression of the synthesis
//! cost or classification of route existence.

mod features;
mod net;
mod train;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{Element, Molecule};
use crate::oracle::UNSOLVED;

pub use features::{FeatureSchema, GraphFeatures, SCHEMA_VERSION};
pub use net::{Batch, Tensor};
pub use train::{
    cross_validate, fit, grid_search, read_dataset, train, write_dataset, CvReport, FoldMetric, GridPoint, TrainConfig,
};

/// Checkpoint file format; bump on incompatible layout changes.
pub const FORMAT_VERSION: u32 = 1;

/// Inference batch size for `predict_batch`.
const PREDICT_CHUNK: usize = 256;

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("element {0} is not in the feature alphabet")]
    Element(Element),
    #[error("non-finite loss at record {index}")]
    NonFinite { index: usize },
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize, last_good: Box<SurrogateModel> },
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("checkpoint holds a {found} model, expected {expected}")]
    TaskMismatch { expected: Task, found: Task },
    #[error("bad config: {0}")]
    Config(String),
    #[error("dataset {path} line {line}: {reason}")]
    Dataset { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Task, String> {
        match s {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

impl Task {
    /// Training target for an oracle score: the score itself, or 1 when a
    /// route exists.
    pub fn target(self, score: f64) -> f64 {
        match self {
            Task::Regression => score,
            Task::Classification => f64::from(u8::from(score < UNSOLVED)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub hidden: usize,
    pub depth: usize,
    pub dropout: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { hidden: 128, depth: 6, dropout: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub task: Task,
    pub hyper: Hyperparams,
    pub schema: FeatureSchema,
    pub params: Vec<Tensor>,
    /// Regression outputs are `raw · target_scale + target_shift`.
    pub target_shift: f64,
    pub target_scale: f64,
}

impl SurrogateModel {
    pub fn new<R: Rng + ?Sized>(task: Task, hyper: Hyperparams, schema: FeatureSchema, rng: &mut R) -> SurrogateModel {
        let params = net::init_params(schema.node_dim(), schema.edge_dim(), hyper.hidden, rng);
        SurrogateModel { task, hyper, schema, params, target_shift: 0.0, target_scale: 1.0 }
    }

    /// All-zero weights; every output is the transformed output bias.
    pub fn zeroed(task: Task, hyper: Hyperparams, schema: FeatureSchema) -> SurrogateModel {
        let params = net::layout(schema.node_dim(), schema.edge_dim(), hyper.hidden)
            .into_iter()
            .map(|(name, rows, cols)| Tensor::zeros(name, rows, cols))
            .collect();
        SurrogateModel { task, hyper, schema, params, target_shift: 0.0, target_scale: 1.0 }
    }

    pub fn featurize(&self, mol: &Molecule) -> Result<GraphFeatures, SurrogateError> {
        self.schema.featurize(mol).map_err(SurrogateError::Element)
    }

    pub fn batch(&self, graphs: &[&GraphFeatures]) -> Batch {
        Batch::new(graphs, self.schema.node_dim(), self.schema.edge_dim())
    }

    /// Maps raw network outputs to predictions: scaled regression value
    /// (unclamped) or class probability.
    fn transform(&self, raw: f64) -> f64 {
        match self.task {
            Task::Regression => raw * self.target_scale + self.target_shift,
            Task::Classification => 1.0 / (1.0 + (-raw).exp()),
        }
    }

    /// Unclamped predictions for a batch, optionally with dropout active.
    pub fn forward<R: Rng + ?Sized>(&self, batch: &Batch, dropout: Option<&mut R>) -> Vec<f64> {
        let mode = match dropout {
            Some(rng) => net::Dropout::On { rate: self.hyper.dropout, rng },
            None => net::Dropout::Off,
        };
        let trace = net::forward(&self.params, self.hyper.depth, batch, mode);
        trace.out.iter().map(|&r| self.transform(r)).collect()
    }

    /// Inference prediction: regression clamped to [1, 11], or the
    /// probability that a route exists.
    pub fn predict(&self, mol: &Molecule) -> Result<f64, SurrogateError> {
        Ok(self.predict_batch(std::slice::from_ref(mol))?[0])
    }

    pub fn predict_batch(&self, mols: &[Molecule]) -> Result<Vec<f64>, SurrogateError> {
        let mut out = Vec::with_capacity(mols.len());
        for chunk in mols.chunks(PREDICT_CHUNK) {
            let feats = chunk.iter().map(|m| self.featurize(m)).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&GraphFeatures> = feats.iter().collect();
            let raw = self.forward::<rand_chacha::ChaCha8Rng>(&self.batch(&refs), None);
            out.extend(raw.into_iter().map(|y| self.finish(y)));
        }
        Ok(out)
    }

    fn finish(&self, y: f64) -> f64 {
        match self.task {
            Task::Regression => y.clamp(1.0, UNSOLVED),
            Task::Classification => y,
        }
    }

    /// Mean loss over a batch (squared error, or binary cross-entropy
    /// against 0/1 targets) and its gradient for every tensor.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        batch: &Batch,
        targets: &[f64],
        dropout: Option<&mut R>,
    ) -> Result<(f64, Vec<Tensor>), SurrogateError> {
        assert_eq!(batch.n_graphs, targets.len(), "one target per graph");
        assert!(!targets.is_empty(), "empty batch");
        let mode = match dropout {
            Some(rng) => net::Dropout::On { rate: self.hyper.dropout, rng },
            None => net::Dropout::Off,
        };
        let trace = net::forward(&self.params, self.hyper.depth, batch, mode);
        let n = targets.len() as f64;
        let mut loss = 0.0;
        let mut d_out = Vec::with_capacity(targets.len());
        for (i, (&raw, &y)) in trace.out.iter().zip(targets).enumerate() {
            let (l, d) = match self.task {
                Task::Regression => {
                    let r = raw * self.target_scale + self.target_shift - y;
                    (r * r, 2.0 * r * self.target_scale)
                }
                Task::Classification => {
                    // softplus(raw) − y·raw, written to avoid overflow.
                    let softplus = raw.max(0.0) + (-raw.abs()).exp().ln_1p();
                    (softplus - y * raw, 1.0 / (1.0 + (-raw).exp()) - y)
                }
            };
            if !l.is_finite() {
                return Err(SurrogateError::NonFinite { index: i });
            }
            loss += l / n;
            d_out.push(d / n);
        }
        let grads = net::backward(&self.params, batch, &trace, &d_out);
        Ok((loss, grads))
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|t| t.data.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SurrogateError> {
        let file = Checkpoint::from_model(self);
        let text = serde_json::to_string_pretty(&file).expect("checkpoint serializes");
        fs::write(path, text)?;
        Ok(())
    }

    /// Loads a checkpoint, checking format version, schema hash and task.
    pub fn load(path: impl AsRef<Path>, expected: Option<Task>) -> Result<SurrogateModel, SurrogateError> {
        let path = path.as_ref();
        let bad = |reason: String| SurrogateError::Checkpoint { path: path.to_path_buf(), reason };
        let text = fs::read_to_string(path)?;
        let file: Checkpoint = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(bad(format!("format version {} (expected {FORMAT_VERSION})", file.format_version)));
        }
        if file.schema_hash != file.schema.hash() {
            return Err(bad("schema hash does not match the stored schema".into()));
        }
        if file.schema.version != SCHEMA_VERSION {
            return Err(bad(format!("feature schema version {} (expected {SCHEMA_VERSION})", file.schema.version)));
        }
        if let Some(task) = expected {
            if task != file.task {
                return Err(SurrogateError::TaskMismatch { expected: task, found: file.task });
            }
        }
        file.into_model().map_err(bad)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    task: Task,
    hyperparams: Hyperparams,
    schema: FeatureSchema,
    schema_hash: String,
    target_shift: f64,
    target_scale: f64,
    weights: Vec<NamedWeights>,
}

#[derive(Serialize, Deserialize)]
struct NamedWeights {
    name: String,
    values: Vec<Vec<f64>>,
}

impl Checkpoint {
    fn from_model(m: &SurrogateModel) -> Checkpoint {
        Checkpoint {
            format_version: FORMAT_VERSION,
            task: m.task,
            hyperparams: m.hyper,
            schema: m.schema.clone(),
            schema_hash: m.schema.hash(),
            target_shift: m.target_shift,
            target_scale: m.target_scale,
            weights: m
                .params
                .iter()
                .map(|t| NamedWeights { name: t.name.clone(), values: t.data.chunks(t.cols).map(<[f64]>::to_vec).collect() })
                .collect(),
        }
    }

    fn into_model(self) -> Result<SurrogateModel, String> {
        let layout = net::layout(self.schema.node_dim(), self.schema.edge_dim(), self.hyperparams.hidden);
        if layout.len() != self.weights.len() {
            return Err(format!("expected {} weight tensors, found {}", layout.len(), self.weights.len()));
        }
        let mut params = Vec::with_capacity(layout.len());
        for ((name, rows, cols), w) in layout.into_iter().zip(self.weights) {
            if w.name != name || w.values.len() != rows || w.values.iter().any(|r| r.len() != cols) {
                return Err(format!("tensor {} does not have shape {name} {rows}x{cols}", w.name));
            }
            let data: Vec<f64> = w.values.into_iter().flatten().collect();
            if data.iter().any(|x| !x.is_finite()) {
                return Err(format!("tensor {name} holds non-finite values"));
            }
            params.push(Tensor { name: name.to_string(), rows, cols, data });
        }
        Ok(SurrogateModel {
            task: self.task,
            hyper: self.hyperparams,
            schema: self.schema,
            params,
            target_shift: self.target_shift,
            target_scale: self.target_scale,
        })
    }
}
