use std::path::Path;

use super::{OptimizerError, SearchReport};

pub fn write_trajectories(report: &SearchReport, path: impl AsRef<Path>) -> Result<(), OptimizerError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["trajectory_id", "step", "smiles", "p", "antibiotic", "qed", "synth_raw", "combined"])?;
    for t in &report.trajectories {
        for r in &t.records {
            let s = &r.score;
            w.write_record([
                t.id.to_string(),
                r.step.to_string(),
                r.smiles.clone(),
                s.p.to_string(),
                s.antibiotic.to_string(),
                s.qed_raw.to_string(),
                s.synth_raw.to_string(),
                s.combined.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_topk(report: &SearchReport, path: impl AsRef<Path>) -> Result<(), OptimizerError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "smiles", "combined", "antibiotic", "p", "qed_raw", "synth_raw", "sa_raw", "oracle_cost"])?;
    for r in &report.top {
        let s = &r.score;
        w.write_record([
            r.rank.to_string(),
            r.smiles.clone(),
            s.combined.to_string(),
            s.antibiotic.to_string(),
            s.p.to_string(),
            s.qed_raw.to_string(),
            s.synth_raw.to_string(),
            r.sa_raw.to_string(),
            r.oracle_cost.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_best_curve(report: &SearchReport, path: impl AsRef<Path>) -> Result<(), OptimizerError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["visited_count", "best_combined"])?;
    for (n, b) in &report.best_curve {
        w.write_record([n.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
