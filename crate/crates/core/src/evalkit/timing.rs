use std::time::Instant;

use serde::Serialize;

use crate::molgraph::Molecule;

use super::EvalError;

/// Calls made before timing starts.
pub const WARMUP_CALLS: usize = 5;
/// Smallest sample reported.
pub const MIN_TIMED: usize = 30;

/// Per-item latency in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    /// Reference mean over this mean, once compared.
    pub speedup: Option<f64>,
}

impl TimingStats {
    pub fn from_samples(samples: &[f64]) -> Result<TimingStats, EvalError> {
        if samples.len() < MIN_TIMED {
            return Err(EvalError::TooFew { needed: MIN_TIMED, got: samples.len() });
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 };
        // Nearest-rank percentile.
        let p95 = s[((0.95 * n as f64).ceil() as usize).clamp(1, n) - 1];
        Ok(TimingStats { count: n, mean: s.iter().sum::<f64>() / n as f64, median, p95, speedup: None })
    }

    /// Sets `speedup` to `reference.mean / self.mean`.
    pub fn against(mut self, reference: &TimingStats) -> TimingStats {
        self.speedup = Some(reference.mean / self.mean);
        self
    }
}

/// Times `f` once per molecule after `WARMUP_CALLS` untimed calls (cycling
/// through `mols`).
pub fn benchmark<F: FnMut(&Molecule)>(mut f: F, mols: &[Molecule]) -> Result<TimingStats, EvalError> {
    if mols.len() < MIN_TIMED {
        return Err(EvalError::TooFew { needed: MIN_TIMED, got: mols.len() });
    }
    for m in mols.iter().cycle().take(WARMUP_CALLS) {
        f(m);
    }
    let samples: Vec<f64> = mols
        .iter()
        .map(|m| {
            let t = Instant::now();
            f(m);
            t.elapsed().as_secs_f64()
        })
        .collect();
    TimingStats::from_samples(&samples)
}
