use std::fmt::Write;

use super::{canon, BondOrder, Molecule};

/// Canonical SMILES: depends only on the isomorphism class of `mol`.
pub fn write_smiles(mol: &Molecule) -> String {
    canon::canonical_labeling(mol).0
}

struct RingEvent {
    partner: usize,
    bond: usize,
    opening: bool,
}

/// Writes `mol` by depth-first traversal from the lowest-ranked atom,
/// visiting neighbors in rank order. Also returns the atoms in the order
/// they appear in the string.
pub(crate) fn emit(mol: &Molecule, rank: &[u32]) -> (String, Vec<usize>) {
    let n = mol.atom_count();
    let root = (0..n).min_by_key(|&i| rank[i]).expect("molecules are non-empty");
    let sorted_neighbors: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut nb = mol.neighbors(i).to_vec();
            nb.sort_by_key(|&(w, _)| rank[w]);
            nb
        })
        .collect();

    let mut visit = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut events: Vec<Vec<RingEvent>> = (0..n).map(|_| Vec::new()).collect();
    let mut bond_used = vec![false; mol.bond_count()];
    let mut counter = 0;
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    visit[root] = counter;
    counter += 1;
    while let Some(&mut (v, ref mut cursor)) = stack.last_mut() {
        let Some(&(w, b)) = sorted_neighbors[v].get(*cursor) else {
            stack.pop();
            continue;
        };
        *cursor += 1;
        if bond_used[b] {
            continue;
        }
        bond_used[b] = true;
        if visit[w] == usize::MAX {
            visit[w] = counter;
            counter += 1;
            children[v].push((w, b));
            stack.push((w, 0));
        } else {
            // Back edge: the ring opens at the ancestor `w`, closes at `v`.
            events[w].push(RingEvent { partner: v, bond: b, opening: true });
            events[v].push(RingEvent { partner: w, bond: b, opening: false });
        }
    }
    for ev in &mut events {
        ev.sort_by_key(|e| (e.opening, visit[e.partner]));
    }

    let mut out = String::with_capacity(2 * n);
    let mut digits: Vec<Option<usize>> = vec![None; mol.bond_count()];
    let mut in_use: Vec<bool> = Vec::new();
    let mut stack: Vec<Frame> = vec![Frame::Atom(root)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Close => out.push(')'),
            Frame::Open => out.push('('),
            Frame::Bond(u, b) => push_bond(mol, u, b, &mut out),
            Frame::Atom(v) => {
                push_atom(mol, v, &mut out);
                let mut freed = Vec::new();
                for ev in &events[v] {
                    if ev.opening {
                        let d = match in_use.iter().position(|&u| !u) {
                            Some(d) => d,
                            None => {
                                in_use.push(false);
                                in_use.len() - 1
                            }
                        };
                        in_use[d] = true;
                        digits[ev.bond] = Some(d);
                        push_bond(mol, v, ev.bond, &mut out);
                        push_digit(d + 1, &mut out);
                    } else {
                        let d = digits[ev.bond].expect("ring opened before closing");
                        push_digit(d + 1, &mut out);
                        freed.push(d);
                    }
                }
                for d in freed {
                    in_use[d] = false;
                }
                let kids = &children[v];
                // Pushed in reverse so the first child is written first.
                for (k, &(w, b)) in kids.iter().enumerate().rev() {
                    let branch = k + 1 < kids.len();
                    if branch {
                        stack.push(Frame::Close);
                    }
                    stack.push(Frame::Atom(w));
                    stack.push(Frame::Bond(v, b));
                    if branch {
                        stack.push(Frame::Open);
                    }
                }
            }
        }
    }
    let mut order = vec![0; n];
    for (atom, &v) in visit.iter().enumerate() {
        order[v] = atom;
    }
    (out, order)
}

enum Frame {
    Atom(usize),
    Bond(usize, usize),
    Open,
    Close,
}

fn push_digit(d: usize, out: &mut String) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        let _ = write!(out, "%{d:02}");
    }
}

fn push_bond(mol: &Molecule, from: usize, bond: usize, out: &mut String) {
    let b = mol.bond(bond);
    let to = b.other(from);
    match b.order {
        BondOrder::Single if mol.atom(from).aromatic && mol.atom(to).aromatic => out.push('-'),
        BondOrder::Single | BondOrder::Aromatic => {}
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
    }
}

fn push_atom(mol: &Molecule, i: usize, out: &mut String) {
    let atom = mol.atom(i);
    let symbol = atom.element.symbol();
    let lower;
    let symbol = if atom.aromatic {
        lower = symbol.to_ascii_lowercase();
        lower.as_str()
    } else {
        symbol
    };
    match atom.explicit_h {
        None => out.push_str(symbol),
        Some(h) => {
            out.push('[');
            out.push_str(symbol);
            match h {
                0 => {}
                1 => out.push('H'),
                _ => {
                    let _ = write!(out, "H{h}");
                }
            }
            match atom.formal_charge {
                0 => {}
                1 => out.push('+'),
                -1 => out.push('-'),
                c if c > 0 => {
                    let _ = write!(out, "+{c}");
                }
                c => {
                    let _ = write!(out, "-{}", -c);
                }
            }
            out.push(']');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn canon(s: &str) -> String {
        write_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn methane() {
        assert_eq!(canon("C"), "C");
    }

    #[test]
    fn orderings_agree() {
        assert_eq!(canon("c1ccccc1"), canon("c1ccc(cc1)"));
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C(=O)(N)C"), canon("CC(N)=O"));
        assert_eq!(canon("[CH4]"), "C");
    }

    #[test]
    fn brackets_survive() {
        let s = canon("c1cc[nH]c1");
        assert!(s.contains("[nH]"), "{s}");
        let s = canon("C[N+](C)(C)C");
        assert!(s.contains("[N+]"), "{s}");
        let s = canon("c1ccccc1-c1ccccc1");
        assert!(s.contains('-'), "{s}");
    }

    #[test]
    fn many_ring_closures() {
        // cubane-like cage exercises digit reuse
        let s = canon("C12C3C4C1C5C2C3C45");
        let again = canon(&s);
        assert_eq!(s, again);
    }
}
