//! Score components: the property-model stand-in, the drug-likeness proxy,
//! the synthetic-accessibility heuristic and the clamp transforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::molgraph::{descriptors, fingerprint, Molecule, DEFAULT_FP_BITS, DEFAULT_FP_RADIUS};

use super::ScoreConfig;

/// Seed of the shipped property model.
pub const PROPERTY_SEED: u64 = 20_210_301;
/// Half-width of the uniform weight distribution.
const PROPERTY_WEIGHT_RANGE: f64 = 0.5;
const PROPERTY_BIAS: f64 = -2.0;

/// Logistic model over circular fingerprint bits with frozen pseudo-random
/// weights; a deterministic stand-in for a trained activity predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyModel {
    pub radius: usize,
    pub nbits: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl PropertyModel {
    pub fn seeded(seed: u64) -> PropertyModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..DEFAULT_FP_BITS)
            .map(|_| rng.random_range(-PROPERTY_WEIGHT_RANGE..PROPERTY_WEIGHT_RANGE))
            .collect();
        PropertyModel { radius: DEFAULT_FP_RADIUS, nbits: DEFAULT_FP_BITS, weights, bias: PROPERTY_BIAS }
    }

    pub fn shipped() -> PropertyModel {
        PropertyModel::seeded(PROPERTY_SEED)
    }

    pub fn probability(&self, mol: &Molecule) -> f64 {
        let fp = fingerprint(mol, self.radius, self.nbits);
        let z = self.bias + fp.ones().map(|b| self.weights[b]).sum::<f64>();
        1.0 / (1.0 + (-z).exp())
    }
}

/// ln(1 − p), with 1 − p floored at `p_epsilon` so the result stays finite.
/// Flooring 1 − p rather than capping p avoids the rounding in 1 − (1 − ε).
pub fn antibiotic_score(p: f64, cfg: &ScoreConfig) -> f64 {
    (1.0 - p).max(cfg.p_epsilon).ln()
}

/// Drug-likeness divided by its cap, clamped to [0, 1].
pub fn qed_score(q: f64, cfg: &ScoreConfig) -> f64 {
    (q / cfg.qed_cap).clamp(0.0, 1.0)
}

/// (11 − s) / (11 − cap), clamped to [0, 1].
pub fn synth_score(s: f64, cap: f64, cfg: &ScoreConfig) -> f64 {
    ((cfg.score_max - s) / (cfg.score_max - cap)).clamp(0.0, 1.0)
}

/// Piecewise-linear desirability: 0 outside `[lo, hi]`, 1 on
/// `[plateau_lo, plateau_hi]`, linear in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trapezoid {
    pub lo: f64,
    pub plateau_lo: f64,
    pub plateau_hi: f64,
    pub hi: f64,
}

impl Trapezoid {
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else if x < self.plateau_lo {
            (x - self.lo) / (self.plateau_lo - self.lo)
        } else if x <= self.plateau_hi {
            1.0
        } else {
            (self.hi - x) / (self.hi - self.plateau_hi)
        }
    }

    /// Support `center ± width`, plateau `center ± width / 2`.
    const fn centered(center: f64, width: f64) -> Trapezoid {
        Trapezoid { lo: center - width, plateau_lo: center - width / 2.0, plateau_hi: center + width / 2.0, hi: center + width }
    }
}

pub const MW_CURVE: Trapezoid = Trapezoid::centered(300.0, 200.0);
pub const RING_CURVE: Trapezoid = Trapezoid::centered(2.0, 2.0);
pub const ROTATABLE_CURVE: Trapezoid = Trapezoid { lo: 0.0, plateau_lo: 0.0, plateau_hi: 8.0, hi: 12.0 };
pub const HETERO_CURVE: Trapezoid = Trapezoid::centered(0.25, 0.2);

/// Geometric mean of the four descriptor desirabilities, in [0, 1].
pub fn druglikeness(mol: &Molecule) -> f64 {
    let d = descriptors(mol);
    let factors = [
        MW_CURVE.eval(d.molecular_weight),
        RING_CURVE.eval(d.ring_count as f64),
        ROTATABLE_CURVE.eval(d.rotatable_bonds as f64),
        HETERO_CURVE.eval(d.heteroatom_fraction),
    ];
    if factors.contains(&0.0) {
        return 0.0;
    }
    factors.iter().product::<f64>().powf(0.25)
}

/// Penalty weights of the synthetic-accessibility heuristic.
pub const SA_SIZE_WEIGHT: f64 = 3.0;
pub const SA_FUSION_WEIGHT: f64 = 1.0;
pub const SA_RING_WEIGHT: f64 = 0.25;
pub const SA_HETERO_WEIGHT: f64 = 1.0;
pub const SA_MACROCYCLE_WEIGHT: f64 = 2.0;
/// Heteroatom fractions within this distance of 0.25 are not penalized.
pub const SA_HETERO_TOLERANCE: f64 = 0.25;

/// Complexity heuristic in [1, 10]:
/// 1 + 3·max(0, heavy − 30)/20 + 1·fused rings + 0.25·rings
///   + 1·max(0, |heteroatom fraction − 0.25| − 0.25) + 2·[largest ring > 8].
///
/// Fusing a ring adds 1.25 while the heteroatom term can drop by at most
/// 4/7, so the score never decreases.
pub fn sa_heuristic(mol: &Molecule) -> f64 {
    let d = descriptors(mol);
    let size = (d.heavy_atoms.saturating_sub(30)) as f64 / 20.0;
    let raw = 1.0
        + SA_SIZE_WEIGHT * size
        + SA_FUSION_WEIGHT * d.fused_rings() as f64
        + SA_RING_WEIGHT * d.ring_count as f64
        + SA_HETERO_WEIGHT * ((d.heteroatom_fraction - 0.25).abs() - SA_HETERO_TOLERANCE).max(0.0)
        + SA_MACROCYCLE_WEIGHT * f64::from(u8::from(d.largest_ring_size > 8));
    raw.clamp(1.0, 10.0)
}
