//! Metrics, cross-validation folds, timing and experiment reports.

mod fidelity;
mod metrics;
mod report;
mod timing;

use thiserror::Error;

pub use fidelity::{
    fidelity_experiment, fidelity_from_data, holdout_r2, labeled_sample, sample_molecules, ExperimentError,
    FidelityMetrics, FidelityReport, ScatterPoint, MAX_INIT_ACTIONS, MIN_FIDELITY_N,
};
pub use metrics::{auc_rank, kfold, r_squared, roc_auc, RocCurve};
pub use report::{
    svg_lines, svg_scatter, write_cv_csv, write_fidelity_csv, write_roc_csv, write_scatter_csv, write_timing_csv, LineStyle,
};
pub use timing::{benchmark, TimingStats, MIN_TIMED, WARMUP_CALLS};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    Length { left: usize, right: usize },
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("targets have zero variance")]
    ZeroVariance,
    #[error("both classes must be present")]
    SingleClass,
    #[error("cannot split {n} records into {k} folds")]
    BadFolds { k: usize, n: usize },
}
