//! Canonical atom ranking.
//!
//! Atoms start in classes keyed by (element, charge, degree, aromaticity,
//! hydrogen count) and are refined Morgan-style by the multiset of
//! (neighbor class, bond order) until the partition is stable. Remaining
//! ties are broken by individualizing each candidate of the first tied class
//! and recursing; the labeling that writes the smallest SMILES wins.
//!
//! Two leaves that write the same string reveal an automorphism. Candidates
//! in the same orbit under known automorphisms that fix the current
//! individualization prefix lead to identical subtrees and are skipped, which
//! keeps molecules with many independent symmetric groups from blowing up
//! the search.

use super::{writer, Molecule};

type Classes = Vec<u32>;

fn dense_ranks<K: Ord>(keys: &[K]) -> (Classes, usize) {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut classes = vec![0u32; keys.len()];
    let mut next = 0u32;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            next += 1;
        }
        classes[idx[w]] = next;
    }
    let count = if keys.is_empty() { 0 } else { next as usize + 1 };
    (classes, count)
}

fn initial_classes(mol: &Molecule) -> (Classes, usize) {
    let keys: Vec<(usize, i8, usize, bool, u8)> = (0..mol.atom_count())
        .map(|i| {
            let a = mol.atom(i);
            (a.element.index(), a.formal_charge, mol.degree(i), a.aromatic, mol.hydrogens(i))
        })
        .collect();
    dense_ranks(&keys)
}

/// Reusable buffers for refinement.
#[derive(Default)]
struct Scratch {
    keys: Vec<(u32, u64)>,
    idx: Vec<usize>,
}

fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Splits classes by a hash of the sorted (neighbor class, bond order)
/// multiset until stable. Sorting by (old class, hash) keeps each step a
/// refinement of the last; a hash collision only leaves a class coarser,
/// which the individualization search absorbs.
fn refine(mol: &Molecule, classes: &mut Classes, mut count: usize, scratch: &mut Scratch) -> usize {
    let n = mol.atom_count();
    while count < n {
        scratch.keys.clear();
        for (i, &class) in classes.iter().enumerate() {
            let mut codes = [0u64; 8];
            let nb = mol.neighbors(i);
            for (slot, &(w, b)) in codes.iter_mut().zip(nb) {
                *slot = u64::from(classes[w]) << 2 | mol.bond(b).order.index() as u64;
            }
            let codes = &mut codes[..nb.len().min(8)];
            codes.sort_unstable();
            let h = codes.iter().fold(nb.len() as u64, |h, &c| mix(h ^ mix(c)));
            scratch.keys.push((class, h));
        }
        scratch.idx.clear();
        scratch.idx.extend(0..n);
        let keys = &scratch.keys;
        scratch.idx.sort_unstable_by_key(|&i| keys[i]);
        let mut next = 0u32;
        for w in 0..n {
            if w > 0 && keys[scratch.idx[w]] != keys[scratch.idx[w - 1]] {
                next += 1;
            }
            classes[scratch.idx[w]] = next;
        }
        let next_count = next as usize + 1;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    count
}

/// Pairs of same-class atoms with identical neighborhoods apart from each
/// other; swapping them is an automorphism.
fn twin_swaps(mol: &Molecule, classes: &[u32]) -> Vec<Vec<usize>> {
    let n = mol.atom_count();
    let hood = |i: usize, other: usize| {
        let mut v: Vec<(usize, usize)> = mol
            .neighbors(i)
            .iter()
            .filter(|&&(w, _)| w != other)
            .map(|&(w, b)| (w, mol.bond(b).order.index()))
            .collect();
        v.sort_unstable();
        v
    };
    let mut swaps = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if classes[u] == classes[v] && hood(u, v) == hood(v, u) {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(u, v);
                swaps.push(perm);
            }
        }
    }
    swaps
}

/// Morgan-refined class per atom; symmetry-equivalent atoms share a rank.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let (mut classes, count) = initial_classes(mol);
    refine(mol, &mut classes, count, &mut Scratch::default());
    classes.into_iter().map(|c| c as usize).collect()
}

struct Best {
    smiles: String,
    ranks: Classes,
    order: Vec<usize>,
}

struct Search<'m> {
    mol: &'m Molecule,
    best: Option<Best>,
    /// Automorphisms found so far, as atom permutations.
    automorphisms: Vec<Vec<usize>>,
    scratch: Scratch,
}

impl Search<'_> {
    fn run(&mut self, mut classes: Classes, count: usize, prefix: &mut Vec<usize>) {
        let n = self.mol.atom_count();
        let count = refine(self.mol, &mut classes, count, &mut self.scratch);
        if count == n {
            self.leaf(classes);
            return;
        }
        let mut sizes = vec![0usize; count];
        for &c in &classes {
            sizes[c as usize] += 1;
        }
        let target = sizes.iter().position(|&s| s > 1).expect("non-discrete partition has a tie") as u32;
        let members: Vec<usize> = (0..n).filter(|&i| classes[i] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &m in &members {
            if tried.iter().any(|&t| self.same_orbit(t, m, prefix)) {
                continue;
            }
            tried.push(m);
            let keys: Vec<(u32, bool)> = (0..n).map(|i| (classes[i], classes[i] == target && i != m)).collect();
            let (child, child_count) = dense_ranks(&keys);
            prefix.push(m);
            self.run(child, child_count, prefix);
            prefix.pop();
        }
    }

    fn leaf(&mut self, ranks: Classes) {
        let (smiles, order) = writer::emit(self.mol, &ranks);
        match &self.best {
            Some(b) if smiles == b.smiles => {
                let mut perm = vec![0; order.len()];
                for (p, &atom) in b.order.iter().enumerate() {
                    perm[atom] = order[p];
                }
                self.automorphisms.push(perm);
            }
            Some(b) if smiles > b.smiles => {}
            _ => self.best = Some(Best { smiles, ranks, order }),
        }
    }

    /// Whether `u` and `v` share an orbit under the known automorphisms that
    /// fix every atom of `prefix`.
    fn same_orbit(&self, u: usize, v: usize, prefix: &[usize]) -> bool {
        let usable: Vec<&Vec<usize>> =
            self.automorphisms.iter().filter(|g| prefix.iter().all(|&p| g[p] == p)).collect();
        if usable.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.mol.atom_count()];
        let mut stack = vec![u];
        seen[u] = true;
        while let Some(x) = stack.pop() {
            if x == v {
                return true;
            }
            for g in &usable {
                let y = g[x];
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }
}

/// Canonical SMILES together with the discrete canonical rank of each atom.
pub(crate) fn canonical_labeling(mol: &Molecule) -> (String, Vec<usize>) {
    let (mut classes, count) = initial_classes(mol);
    let mut scratch = Scratch::default();
    let count = refine(mol, &mut classes, count, &mut scratch);
    let automorphisms = if count < mol.atom_count() { twin_swaps(mol, &classes) } else { Vec::new() };
    let mut search = Search { mol, best: None, automorphisms, scratch };
    search.run(classes, count, &mut Vec::new());
    let best = search.best.expect("search visits at least one leaf");
    (best.smiles, best.ranks.into_iter().map(|c| c as usize).collect())
}

/// Discrete canonical rank of every atom (a permutation of `0..n`).
pub fn canonical_order(mol: &Molecule) -> Vec<usize> {
    canonical_labeling(mol).1
}
