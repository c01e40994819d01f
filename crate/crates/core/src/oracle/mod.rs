//! The slow ground-truth synthesizability oracle: a template-based A*
//! retrosynthesis planner over a purchasable catalog, a mapping from the
//! best route to a synthesis cost in [1, 10] (11 when no route exists), and
//! cached batch labeling.

mod cache;
mod catalog;
mod planner;
mod templates;

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{MolError, Molecule};

pub use cache::LabelCache;
pub use catalog::Catalog;
pub use planner::{Planner, RouteResult, RouteStep, DEFAULT_NODE_BUDGET};
pub use templates::{default_templates, match_bond, DisconnectionTemplate, TemplateKind};

/// Weight of the step count in the cost mapping.
pub const STEP_WEIGHT: f64 = 0.8;
/// Weight of log(1 + total leaf price) in the cost mapping.
pub const PRICE_WEIGHT: f64 = 0.5;
/// Score reserved for molecules without a route.
pub const UNSOLVED: f64 = 11.0;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("catalog line {line}: price {price} must be finite and positive")]
    BadPrice { line: usize, price: f64 },
    #[error("catalog line {line}: {source}")]
    Smiles { line: usize, source: MolError },
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("cache {path}: {reason}")]
    Cache { path: PathBuf, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Synthesis cost in [1, 10], or exactly 11 when no route was found.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SynthCost(pub f64);

impl SynthCost {
    /// Maps a route to a cost: clamp(1 + 0.8·steps + 0.5·ln(1 + Σ prices), 1, 10).
    pub fn from_route(route: &RouteResult) -> SynthCost {
        if !route.solved {
            return SynthCost(UNSOLVED);
        }
        SynthCost::from_parts(route.steps.len(), route.leaf_price_sum())
    }

    pub fn from_parts(steps: usize, price_sum: f64) -> SynthCost {
        let raw = 1.0 + STEP_WEIGHT * steps as f64 + PRICE_WEIGHT * (1.0 + price_sum).ln();
        SynthCost(raw.clamp(1.0, 10.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_unsolved(self) -> bool {
        self.0 >= UNSOLVED
    }
}

impl fmt::Display for SynthCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planner plus score mapping.
#[derive(Debug, Clone)]
pub struct Oracle {
    planner: Planner,
}

impl Oracle {
    pub fn new(planner: Planner) -> Oracle {
        Oracle { planner }
    }

    /// Builtin catalog, shipped templates, default node budget.
    pub fn builtin() -> Oracle {
        Oracle::new(Planner::new(Arc::new(Catalog::builtin())))
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    pub fn score(&self, mol: &Molecule) -> SynthCost {
        SynthCost::from_route(&self.planner.plan_route(mol))
    }

    /// Scores every molecule, consulting and filling `cache`. Uncached
    /// molecules are planned once each, in parallel; output order follows
    /// the input. The cache is persisted before returning.
    pub fn label_batch(&self, mols: &[Molecule], cache: &mut LabelCache) -> Result<Vec<(String, SynthCost)>, OracleError> {
        let keys: Vec<&str> = mols.iter().map(|m| m.canonical_smiles()).collect();
        let mut todo: Vec<usize> = Vec::new();
        let mut queued = std::collections::HashSet::new();
        for (i, key) in keys.iter().enumerate() {
            if cache.get(key).is_none() && queued.insert(*key) {
                todo.push(i);
            }
        }
        let fresh: Vec<(usize, SynthCost)> = todo.par_iter().map(|&i| (i, self.score(&mols[i]))).collect();
        for (i, cost) in fresh {
            cache.insert(keys[i].to_string(), cost.0);
        }
        cache.persist()?;
        Ok(keys
            .iter()
            .map(|k| (k.to_string(), SynthCost(cache.get(k).expect("every key was labeled"))))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn small_catalog(rows: &[(&str, f64)]) -> Arc<Catalog> {
        Arc::new(Catalog::from_entries(rows.iter().map(|(s, p)| (s.to_string(), *p))).unwrap())
    }

    #[test]
    fn catalog_member_is_goal_at_root() {
        let planner = Planner::new(small_catalog(&[("CC(=O)O", 4.0)]));
        let route = planner.plan_route(&parse_smiles("CC(=O)O").unwrap());
        assert!(route.solved);
        assert!(route.steps.is_empty());
        assert!(route.nodes_expanded <= 1);
        let cost = SynthCost::from_route(&route).0;
        assert!((cost - (1.0 + 0.5 * 5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn no_template_no_route() {
        let planner = Planner::new(small_catalog(&[("C", 1.0)]));
        let route = planner.plan_route(&parse_smiles("FC(F)F").unwrap());
        assert!(!route.solved);
        assert_eq!(SynthCost::from_route(&route).0, UNSOLVED);
    }

    #[test]
    fn amide_from_two_catalog_entries() {
        let planner = Planner::new(small_catalog(&[("CC=O", 3.0), ("Nc1ccccc1", 5.0), ("C", 9.0)]));
        let mol = parse_smiles("CC(=O)Nc1ccccc1").unwrap();
        let route = planner.plan_route(&mol);
        assert!(route.solved);
        assert_eq!(route.steps.len(), 1);
        assert_eq!(route.steps[0].template, "amide");
        let expected = 1.0 - 0.9f64.ln() + 8.0;
        assert!((route.total_cost - expected).abs() < 1e-12);
        assert!((planner.exhaustive_cost(&mol).unwrap() - expected).abs() < 1e-12);
        assert!(route.render().contains("[amide]"));
    }

    #[test]
    fn more_steps_cost_more() {
        assert!(SynthCost::from_parts(1, 20.0).0 < SynthCost::from_parts(3, 20.0).0);
        assert_eq!(SynthCost::from_parts(40, 1e9).0, 10.0);
    }

    #[test]
    fn budget_is_respected() {
        let catalog = small_catalog(&[("CC", 1.0)]);
        let planner = Planner::with_templates(catalog, default_templates(), 5);
        let route = planner.plan_route(&parse_smiles("CCCCCCCCCCCCCCCCF").unwrap());
        assert!(!route.solved);
        assert!(route.nodes_expanded <= 5);
    }

    #[test]
    fn batch_uses_cache() {
        let oracle = Oracle::builtin();
        let m = parse_smiles("CCOc1ccccc1").unwrap();
        let mut cache = LabelCache::in_memory();
        let rows = oracle.label_batch(&[m.clone(), m.clone()], &mut cache).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(cache.len(), 1);
        assert_eq!(rows[0], rows[1]);
        assert!(oracle.label_batch(&[], &mut cache).unwrap().is_empty());
    }
}
