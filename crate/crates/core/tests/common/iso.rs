//! Brute-force labeled graph isomorphism and relabeling helpers, independent
//! of the canonicalization code under test.

use rand::seq::SliceRandom;
use rand::Rng;
use synthweaver::molgraph::{Bond, BondOrder, Molecule};

type Label = (usize, i8, bool, u8, usize);

fn labels(m: &Molecule) -> Vec<Label> {
    (0..m.atom_count())
        .map(|i| {
            let a = m.atom(i);
            (a.element.index(), a.formal_charge, a.aromatic, m.hydrogens(i), m.degree(i))
        })
        .collect()
}

fn order_between(m: &Molecule, a: usize, b: usize) -> Option<BondOrder> {
    m.bond_between(a, b).map(|k| m.bond(k).order)
}

/// Whether `a` and `b` are isomorphic as graphs labeled by element, charge,
/// aromaticity, hydrogen count and bond order.
pub fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    let n = a.atom_count();
    if n != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let (la, lb) = (labels(a), labels(b));
    let mut sa = la.clone();
    let mut sb = lb.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return false;
    }
    // Visit `a` in BFS order so every atom after the first has a mapped neighbor.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        order.push(s);
        let mut head = order.len() - 1;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(w, _) in a.neighbors(x) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend(a, b, &la, &lb, &order, 0, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    a: &Molecule,
    b: &Molecule,
    la: &[Label],
    lb: &[Label],
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let x = order[depth];
    let mapped_nbr = a.neighbors(x).iter().map(|&(w, _)| w).find(|&w| map[w] != usize::MAX);
    let candidates: Vec<usize> = match mapped_nbr {
        Some(w) => b.neighbors(map[w]).iter().map(|&(y, _)| y).collect(),
        None => (0..b.atom_count()).collect(),
    };
    for y in candidates {
        if used[y] || la[x] != lb[y] {
            continue;
        }
        let consistent = (0..a.atom_count())
            .filter(|&w| map[w] != usize::MAX)
            .all(|w| order_between(a, x, w) == order_between(b, y, map[w]));
        if !consistent {
            continue;
        }
        map[x] = y;
        used[y] = true;
        if extend(a, b, la, lb, order, depth + 1, map, used) {
            return true;
        }
        map[x] = usize::MAX;
        used[y] = false;
    }
    false
}

/// The same molecule with atoms renumbered, bonds reordered and bond
/// endpoints randomly swapped.
pub fn relabel<R: Rng>(m: &Molecule, rng: &mut R) -> Molecule {
    let n = m.atom_count();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut atoms = vec![*m.atom(0); n];
    for (old, &new) in perm.iter().enumerate() {
        atoms[new] = *m.atom(old);
    }
    let mut bonds: Vec<Bond> = m
        .bonds()
        .iter()
        .map(|b| {
            let (x, y) = (perm[b.a], perm[b.b]);
            if rng.random_bool(0.5) {
                Bond::new(x, y, b.order)
            } else {
                Bond::new(y, x, b.order)
            }
        })
        .collect();
    bonds.shuffle(rng);
    Molecule::new(atoms, bonds).expect("relabeling preserves validity")
}
