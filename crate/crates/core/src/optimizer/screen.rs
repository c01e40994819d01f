use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::molgraph::{parse_smiles, Molecule};
use crate::scoring::{ScoreBundle, Scorer};

use super::{OptimizerError, SearchReport, TopK};

const CHUNK: usize = 256;

/// Scores every line of a SMILES file (first whitespace-separated token;
/// blank lines and `#` comments skipped) and keeps the best `top_k`.
/// Memory is bounded by the chunk size and `top_k`; the best-so-far curve
/// keeps only the points where the best score improved, plus the last one.
pub fn screen_library(path: impl AsRef<Path>, scorer: &Scorer, top_k: usize) -> Result<SearchReport, OptimizerError> {
    if top_k == 0 {
        return Err(OptimizerError::Config("top_k must be at least 1".into()));
    }
    let reader = BufReader::new(File::open(path)?);
    let mut top = TopK::new(top_k);
    let mut report = SearchReport::default();
    let mut chunk: Vec<Molecule> = Vec::with_capacity(CHUNK);
    for line in reader.lines() {
        let line = line?;
        let Some(token) = line.split_whitespace().next() else { continue };
        if token.starts_with('#') {
            continue;
        }
        match parse_smiles(token) {
            Ok(m) => chunk.push(m),
            Err(_) => report.parse_errors += 1,
        }
        if chunk.len() == CHUNK {
            score_chunk(&mut chunk, scorer, &mut top, &mut report);
        }
    }
    score_chunk(&mut chunk, scorer, &mut top, &mut report);
    if let Some(&(n, best)) = report.best_curve.last() {
        if n != report.scored {
            report.best_curve.push((report.scored, best));
        }
    }
    report.top = top.into_rows();
    Ok(report)
}

fn record(report: &mut SearchReport, top: &mut TopK, mol: &Molecule, score: ScoreBundle) {
    top.offer(mol.canonical_smiles(), score);
    report.scored += 1;
    if report.best_curve.last().is_none_or(|&(_, b)| score.combined < b) {
        report.best_curve.push((report.scored, score.combined));
    }
}

fn score_chunk(chunk: &mut Vec<Molecule>, scorer: &Scorer, top: &mut TopK, report: &mut SearchReport) {
    match scorer.score_batch(chunk) {
        Ok(scores) => {
            for (m, s) in chunk.iter().zip(scores) {
                record(report, top, m, s);
            }
        }
        // Isolate the molecules the scorer rejects.
        Err(_) => {
            for m in chunk.iter() {
                match scorer.score(m) {
                    Ok(s) => record(report, top, m, s),
                    Err(e) => {
                        report.parse_errors += 1;
                        report.errors.push(format!("{}: {e}", m.canonical_smiles()));
                    }
                }
            }
        }
    }
    chunk.clear();
}
