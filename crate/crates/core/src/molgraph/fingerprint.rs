//! Circular (Morgan-style) substructure fingerprints with a fixed FNV-1a hash,
//! so bit positions are identical across runs and platforms.

use super::Molecule;

pub const DEFAULT_FP_RADIUS: usize = 2;
pub const DEFAULT_FP_BITS: usize = 2048;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(words: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    nbits: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn new(nbits: usize) -> Fingerprint {
        Fingerprint { nbits, words: vec![0; nbits.div_ceil(64)] }
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| wi * 64 + b)
        })
    }
}

/// Hashes every atom's radius-`r` environment, `r = 0..=radius`, into one bit.
pub fn fingerprint(mol: &Molecule, radius: usize, nbits: usize) -> Fingerprint {
    assert!(radius <= 3, "fingerprint radius must be at most 3");
    assert!(nbits.is_power_of_two(), "fingerprint length must be a power of two");
    let n = mol.atom_count();
    let mut fp = Fingerprint::new(nbits);
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            fnv1a(&[
                a.element.index() as u64,
                a.formal_charge as i64 as u64,
                mol.degree(i) as u64,
                u64::from(a.aromatic),
                u64::from(mol.hydrogens(i)),
                u64::from(mol.is_ring_atom(i)),
            ])
        })
        .collect();
    for &id in &ids {
        fp.set((id as usize) & (nbits - 1));
    }
    let mut words = Vec::new();
    for r in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(w, b)| (mol.bond(b).order.index() as u64, ids[w]))
                    .collect();
                env.sort_unstable();
                words.clear();
                words.push(r as u64);
                words.push(ids[i]);
                for (order, id) in env {
                    words.push(order);
                    words.push(id);
                }
                fnv1a(&words)
            })
            .collect();
        for &id in &next {
            fp.set((id as usize) & (nbits - 1));
        }
        ids = next;
    }
    fp
}
