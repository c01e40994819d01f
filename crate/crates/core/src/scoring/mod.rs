//! Multi-objective score: activity term × drug-likeness term × synthesizability
//! term, each backed by a pluggable provider. Lower is better.

mod components;

use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::Molecule;
use crate::surrogate::{SurrogateError, SurrogateModel, Task};

pub use components::{
    antibiotic_score, druglikeness, qed_score, sa_heuristic, synth_score, PropertyModel, Trapezoid, HETERO_CURVE,
    MW_CURVE, PROPERTY_SEED, RING_CURVE, ROTATABLE_CURVE, SA_FUSION_WEIGHT, SA_HETERO_TOLERANCE, SA_HETERO_WEIGHT,
    SA_MACROCYCLE_WEIGHT, SA_RING_WEIGHT, SA_SIZE_WEIGHT,
};

/// Average drug-likeness, synthesis cost and SA values of approved drugs.
/// Reference only; the caps are what the score uses.
pub const REFERENCE_QED: f64 = 0.52;
pub const REFERENCE_RETRO: f64 = 5.0;
pub const REFERENCE_SA: f64 = 3.5;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("bad score config: {0}")]
    Config(String),
    #[error("synthesizability surrogate must be a regression model, got {0}")]
    SurrogateTask(Task),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    pub qed_cap: f64,
    pub retro_cap: f64,
    pub sa_cap: f64,
    pub score_max: f64,
    pub p_epsilon: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig { qed_cap: 0.70, retro_cap: 4.5, sa_cap: 3.5, score_max: 11.0, p_epsilon: 1e-12 }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        let bad = |m: &str| Err(ScoreError::Config(m.to_string()));
        if !(self.qed_cap > 0.0 && self.qed_cap <= 1.0) {
            return bad("qed_cap must be in (0, 1]");
        }
        if !(self.retro_cap < self.score_max && self.sa_cap < self.score_max) {
            return bad("caps must be below score_max");
        }
        if !(self.p_epsilon > 0.0 && self.p_epsilon < 1.0) {
            return bad("p_epsilon must be in (0, 1)");
        }
        Ok(())
    }
}

/// Source of the synthesizability raw value.
#[derive(Debug, Clone)]
pub enum SynthBackend {
    /// Regression surrogate of the planner cost, in [1, 11].
    Surrogate(Arc<SurrogateModel>),
    /// Complexity heuristic, in [1, 10].
    Sa,
}

impl SynthBackend {
    pub fn surrogate(model: Arc<SurrogateModel>) -> Result<SynthBackend, ScoreError> {
        if model.task != Task::Regression {
            return Err(ScoreError::SurrogateTask(model.task));
        }
        Ok(SynthBackend::Surrogate(model))
    }

    pub fn name(&self) -> &'static str {
        match self {
            SynthBackend::Surrogate(_) => "retrognn",
            SynthBackend::Sa => "sa",
        }
    }

    fn cap(&self, cfg: &ScoreConfig) -> f64 {
        match self {
            SynthBackend::Surrogate(_) => cfg.retro_cap,
            SynthBackend::Sa => cfg.sa_cap,
        }
    }

    fn raw_batch(&self, mols: &[Molecule]) -> Result<Vec<f64>, ScoreError> {
        match self {
            SynthBackend::Surrogate(m) => Ok(m.predict_batch(mols)?),
            SynthBackend::Sa => Ok(mols.iter().map(sa_heuristic).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBundle {
    pub p: f64,
    pub antibiotic: f64,
    pub qed_raw: f64,
    pub qed_clamped: f64,
    pub synth_raw: f64,
    pub synth_clamped: f64,
    pub combined: f64,
}

impl ScoreBundle {
    pub fn from_parts(p: f64, qed_raw: f64, synth_raw: f64, synth_cap: f64, cfg: &ScoreConfig) -> ScoreBundle {
        let antibiotic = antibiotic_score(p, cfg);
        let qed_clamped = qed_score(qed_raw, cfg);
        let synth_clamped = synth_score(synth_raw, synth_cap, cfg);
        // A zero factor would give −0.0; keep the sign out of reports.
        let combined = antibiotic * qed_clamped * synth_clamped + 0.0;
        ScoreBundle { p, antibiotic, qed_raw, qed_clamped, synth_raw, synth_clamped, combined }
    }

    /// Ranking order: combined ascending, ties by synth_raw ascending.
    pub fn rank_cmp(&self, other: &ScoreBundle) -> Ordering {
        self.combined.total_cmp(&other.combined).then(self.synth_raw.total_cmp(&other.synth_raw))
    }
}

/// Bundles the three providers with a config.
#[derive(Debug, Clone)]
pub struct Scorer {
    pub config: ScoreConfig,
    pub property: Arc<PropertyModel>,
    pub synth: SynthBackend,
}

impl Scorer {
    pub fn new(config: ScoreConfig, property: PropertyModel, synth: SynthBackend) -> Result<Scorer, ScoreError> {
        config.validate()?;
        Ok(Scorer { config, property: Arc::new(property), synth })
    }

    pub fn score(&self, mol: &Molecule) -> Result<ScoreBundle, ScoreError> {
        Ok(self.score_batch(std::slice::from_ref(mol))?.remove(0))
    }

    /// Scores many molecules; the surrogate runs batched.
    pub fn score_batch(&self, mols: &[Molecule]) -> Result<Vec<ScoreBundle>, ScoreError> {
        let synth = self.synth.raw_batch(mols)?;
        let cap = self.synth.cap(&self.config);
        Ok(mols
            .iter()
            .zip(synth)
            .map(|(m, s)| ScoreBundle::from_parts(self.property.probability(m), druglikeness(m), s, cap, &self.config))
            .collect())
    }
}
