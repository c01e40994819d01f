use std::path::Path;

use anyhow::Context;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use synthweaver::optimizer::RunConfig;
use synthweaver::scoring::{ScoreConfig, PROPERTY_SEED};
use synthweaver::surrogate::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Regression surrogate of the planner cost.
    Retrognn,
    /// Complexity heuristic.
    Sa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Softmax,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreSection {
    pub synth_backend: Backend,
    pub property_seed: u64,
    pub caps: ScoreConfig,
}

impl Default for ScoreSection {
    fn default() -> Self {
        ScoreSection { synth_backend: Backend::Retrognn, property_seed: PROPERTY_SEED, caps: ScoreConfig::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSection {
    pub space: String,
    pub n: usize,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection { space: "frag105".into(), n: 1000 }
    }
}

/// Run configuration file (TOML). Flags override file values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub dataset: DatasetSection,
    pub train: TrainConfig,
    pub search: RunConfig,
    pub score: ScoreSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<FileConfig> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
