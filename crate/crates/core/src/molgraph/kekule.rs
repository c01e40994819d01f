use super::{Bond, BondOrder, Molecule};

/// Kekulé bond orders for `mol`: aromatic bonds become single or double so
/// that every pi-contributing aromatic atom carries exactly one double bond.
pub fn kekulize(mol: &Molecule) -> Vec<BondOrder> {
    let pi: Vec<bool> = (0..mol.atom_count()).map(|i| mol.needs_pi(i)).collect();
    let doubles = matching(mol.bonds(), &mol.adjacency, &pi)
        .expect("sanitized molecules always kekulize");
    let mut orders: Vec<BondOrder> = mol
        .bonds()
        .iter()
        .map(|b| if b.order == BondOrder::Aromatic { BondOrder::Single } else { b.order })
        .collect();
    for b in doubles {
        orders[b] = BondOrder::Double;
    }
    orders
}

/// Perfect matching of pi atoms over aromatic bonds, by backtracking that
/// always branches on the most constrained atom. Returns matched bond indices.
pub(crate) fn matching(
    bonds: &[Bond],
    adjacency: &[Vec<(usize, usize)>],
    pi: &[bool],
) -> Option<Vec<usize>> {
    let mut matched = vec![false; pi.len()];
    let mut chosen = Vec::new();
    if search(bonds, adjacency, pi, &mut matched, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

fn options<'a>(
    v: usize,
    bonds: &'a [Bond],
    adjacency: &'a [Vec<(usize, usize)>],
    pi: &'a [bool],
    matched: &'a [bool],
) -> impl Iterator<Item = (usize, usize)> + 'a {
    adjacency[v]
        .iter()
        .copied()
        .filter(move |&(w, b)| pi[w] && !matched[w] && bonds[b].order == BondOrder::Aromatic)
}

fn search(
    bonds: &[Bond],
    adjacency: &[Vec<(usize, usize)>],
    pi: &[bool],
    matched: &mut Vec<bool>,
    chosen: &mut Vec<usize>,
) -> bool {
    let mut best: Option<(usize, usize)> = None;
    for v in 0..pi.len() {
        if !pi[v] || matched[v] {
            continue;
        }
        let count = options(v, bonds, adjacency, pi, matched).count();
        if count == 0 {
            return false;
        }
        if best.is_none_or(|(_, c)| count < c) {
            best = Some((v, count));
        }
    }
    let Some((v, _)) = best else {
        return true;
    };
    let candidates: Vec<(usize, usize)> = options(v, bonds, adjacency, pi, matched).collect();
    for (w, b) in candidates {
        matched[v] = true;
        matched[w] = true;
        chosen.push(b);
        if search(bonds, adjacency, pi, matched, chosen) {
            return true;
        }
        chosen.pop();
        matched[v] = false;
        matched[w] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn benzene_alternates() {
        let m = parse_smiles("c1ccccc1").unwrap();
        let orders = kekulize(&m);
        assert_eq!(orders.iter().filter(|&&o| o == BondOrder::Double).count(), 3);
        for i in 0..6 {
            let doubles = m
                .neighbors(i)
                .iter()
                .filter(|&&(_, b)| orders[b] == BondOrder::Double)
                .count();
            assert_eq!(doubles, 1);
        }
    }

    #[test]
    fn pyrrole_nitrogen_keeps_single_bonds() {
        let m = parse_smiles("c1cc[nH]c1").unwrap();
        let orders = kekulize(&m);
        assert_eq!(orders.iter().filter(|&&o| o == BondOrder::Double).count(), 2);
    }

    #[test]
    fn cyclopentadiene_carbon_ring_fails() {
        assert!(parse_smiles("c1cccc1").is_err());
    }
}
