//! SMILES reader for the organic subset plus bracket atoms with charge and
//! hydrogen count. No stereochemistry, no isotopes.

use std::collections::BTreeMap;

use super::rings;
use super::{hydrogen_state, Atom, Bond, BondOrder, Element, MolError, Molecule, DEFAULT_MAX_ATOMS};

#[derive(Debug, Clone, Copy)]
enum RawAtom {
    Real(Atom),
    Dummy,
}

impl RawAtom {
    fn is_aromatic(&self) -> bool {
        matches!(self, RawAtom::Real(a) if a.aromatic)
    }
}

#[derive(Debug, Default)]
struct RawGraph {
    atoms: Vec<RawAtom>,
    /// `None` order: no bond symbol was written.
    bonds: Vec<(usize, usize, Option<BondOrder>)>,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    allow_dummy: bool,
}

fn syntax(pos: usize, msg: impl Into<String>) -> MolError {
    MolError::Syntax { pos, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<RawGraph, MolError> {
        let mut graph = RawGraph::default();
        let mut prev: Option<usize> = None;
        let mut branches: Vec<Option<usize>> = Vec::new();
        let mut pending: Option<(BondOrder, usize)> = None;
        // label -> (atom, bond written at the opening, position)
        let mut open_rings: BTreeMap<u16, (usize, Option<BondOrder>, usize)> = BTreeMap::new();

        if self.text.is_empty() {
            return Err(MolError::Empty);
        }

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if prev.is_none() {
                        return Err(syntax(start, "branch without a preceding atom"));
                    }
                    if pending.is_some() {
                        return Err(syntax(start, "bond symbol before branch"));
                    }
                    branches.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(syntax(start, "dangling bond symbol"));
                    }
                    prev = branches.pop().ok_or_else(|| syntax(start, "unbalanced ')'"))?;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if pending.is_some() {
                        return Err(syntax(start, "two consecutive bond symbols"));
                    }
                    if prev.is_none() {
                        return Err(syntax(start, "bond symbol without a preceding atom"));
                    }
                    let order = match c {
                        b'-' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        _ => BondOrder::Aromatic,
                    };
                    pending = Some((order, start));
                    self.pos += 1;
                }
                b'/' | b'\\' => return Err(syntax(start, "stereo bonds are not supported")),
                b'.' => {
                    if pending.is_some() {
                        return Err(syntax(start, "dangling bond symbol"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let atom = prev.ok_or_else(|| syntax(start, "ring closure without an atom"))?;
                    let label = self.ring_label()?;
                    let order = pending.take().map(|(o, _)| o);
                    match open_rings.remove(&label) {
                        Some((other, opening_order, _)) => {
                            if other == atom {
                                return Err(syntax(start, "ring closure to the same atom"));
                            }
                            let order = match (opening_order, order) {
                                (Some(a), Some(b)) if a != b => {
                                    return Err(syntax(start, "conflicting ring-closure bond symbols"))
                                }
                                (a, b) => a.or(b),
                            };
                            graph.bonds.push((other, atom, order));
                        }
                        None => {
                            open_rings.insert(label, (atom, order, start));
                        }
                    }
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    prev = Some(self.push_atom(&mut graph, atom, prev, pending.take()));
                }
                b'*' => {
                    if !self.allow_dummy {
                        return Err(syntax(start, "attachment point '*' outside a fragment"));
                    }
                    self.pos += 1;
                    prev = Some(self.push_atom(&mut graph, RawAtom::Dummy, prev, pending.take()));
                }
                c if c.is_ascii_alphabetic() => {
                    let atom = self.organic_atom()?;
                    prev = Some(self.push_atom(&mut graph, RawAtom::Real(atom), prev, pending.take()));
                }
                _ => return Err(syntax(start, format!("unexpected character '{}'", c as char))),
            }
        }
        if let Some((_, pos)) = pending {
            return Err(syntax(pos, "dangling bond symbol"));
        }
        if !branches.is_empty() {
            return Err(syntax(self.pos, "unclosed branch"));
        }
        if let Some((&label, &(_, _, pos))) = open_rings.iter().next() {
            return Err(MolError::UnmatchedRing { label, pos });
        }
        Ok(graph)
    }

    fn push_atom(
        &self,
        graph: &mut RawGraph,
        atom: RawAtom,
        prev: Option<usize>,
        pending: Option<(BondOrder, usize)>,
    ) -> usize {
        let idx = graph.atoms.len();
        graph.atoms.push(atom);
        if let Some(p) = prev {
            graph.bonds.push((p, idx, pending.map(|(o, _)| o)));
        }
        idx
    }

    fn ring_label(&mut self) -> Result<u16, MolError> {
        let start = self.pos;
        if self.peek() == Some(b'%') {
            self.pos += 1;
            let digits = self.text.get(self.pos..self.pos + 2).unwrap_or_default();
            if digits.len() != 2 || !digits.iter().all(u8::is_ascii_digit) {
                return Err(syntax(start, "'%' must be followed by two digits"));
            }
            self.pos += 2;
            Ok(((digits[0] - b'0') * 10 + (digits[1] - b'0')) as u16)
        } else {
            let d = self.text[self.pos] - b'0';
            self.pos += 1;
            Ok(d as u16)
        }
    }

    fn organic_atom(&mut self) -> Result<Atom, MolError> {
        let start = self.pos;
        let c = self.text[start];
        let next = self.text.get(start + 1).copied();
        let (symbol, len, aromatic) = match (c, next) {
            (b'C', Some(b'l')) => ("Cl", 2, false),
            (b'B', Some(b'r')) => ("Br", 2, false),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                (std::str::from_utf8(&self.text[start..start + 1]).unwrap(), 1, false)
            }
            (b'b', _) => ("B", 1, true),
            (b'c', _) => ("C", 1, true),
            (b'n', _) => ("N", 1, true),
            (b'o', _) => ("O", 1, true),
            (b'p', _) => ("P", 1, true),
            (b's', _) => ("S", 1, true),
            _ => {
                let end = if next.is_some_and(|n| n.is_ascii_lowercase()) { start + 2 } else { start + 1 };
                return Err(MolError::UnknownElement {
                    symbol: String::from_utf8_lossy(&self.text[start..end]).into_owned(),
                    pos: start,
                });
            }
        };
        self.pos += len;
        let element = Element::from_symbol(symbol).expect("organic subset symbols are known");
        Ok(Atom { element, formal_charge: 0, aromatic, explicit_h: None })
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, MolError> {
        let open = self.pos;
        self.pos += 1;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(syntax(self.pos, "isotopes are not supported"));
        }
        if self.peek() == Some(b'*') {
            if !self.allow_dummy {
                return Err(syntax(self.pos, "attachment point '*' outside a fragment"));
            }
            self.pos += 1;
            if self.peek() != Some(b']') {
                return Err(syntax(self.pos, "expected ']'"));
            }
            self.pos += 1;
            return Ok(RawAtom::Dummy);
        }
        let sym_start = self.pos;
        let first = self.peek().ok_or_else(|| syntax(sym_start, "unterminated bracket atom"))?;
        let (element, aromatic) = if first.is_ascii_uppercase() {
            let two = self
                .text
                .get(sym_start..sym_start + 2)
                .and_then(|s| std::str::from_utf8(s).ok())
                .and_then(Element::from_symbol);
            if let Some(e) = two {
                self.pos += 2;
                (e, false)
            } else {
                let one = std::str::from_utf8(&self.text[sym_start..sym_start + 1]).unwrap();
                let e = Element::from_symbol(one).ok_or_else(|| {
                    let end = if self.text.get(sym_start + 1).is_some_and(u8::is_ascii_lowercase) {
                        sym_start + 2
                    } else {
                        sym_start + 1
                    };
                    MolError::UnknownElement {
                        symbol: String::from_utf8_lossy(&self.text[sym_start..end]).into_owned(),
                        pos: sym_start,
                    }
                })?;
                self.pos += 1;
                (e, false)
            }
        } else if first.is_ascii_lowercase() {
            let e = match first {
                b'b' => Element::B,
                b'c' => Element::C,
                b'n' => Element::N,
                b'o' => Element::O,
                b'p' => Element::P,
                b's' => Element::S,
                _ => {
                    return Err(MolError::UnknownElement {
                        symbol: (first as char).to_string(),
                        pos: sym_start,
                    })
                }
            };
            if self.text.get(sym_start + 1).is_some_and(u8::is_ascii_lowercase) {
                return Err(MolError::UnknownElement {
                    symbol: String::from_utf8_lossy(&self.text[sym_start..sym_start + 2]).into_owned(),
                    pos: sym_start,
                });
            }
            self.pos += 1;
            (e, true)
        } else {
            return Err(syntax(sym_start, "expected element symbol"));
        };

        if self.peek() == Some(b'@') {
            return Err(syntax(self.pos, "chirality is not supported"));
        }
        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.small_number().unwrap_or(1);
        }
        let mut charge: i8 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.small_number() {
                charge = unit * n as i8;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
        }
        if self.peek() == Some(b':') {
            return Err(syntax(self.pos, "atom classes are not supported"));
        }
        if self.peek() != Some(b']') {
            return Err(syntax(self.pos, "expected ']'"));
        }
        self.pos += 1;
        if charge.abs() > 2 {
            return Err(syntax(open, "formal charge outside [-2, 2]"));
        }
        Ok(RawAtom::Real(Atom { element, formal_charge: charge, aromatic, explicit_h: Some(hydrogens) }))
    }

    fn small_number(&mut self) -> Option<u8> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) && self.pos - start < 2 {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.text[start..self.pos]).ok()?.parse().ok()
    }
}

/// Resolves unwritten bond symbols: aromatic between two aromatic atoms when
/// the bond is on a ring, single otherwise.
fn resolve_bonds(graph: &RawGraph) -> Vec<Bond> {
    let n = graph.atoms.len();
    let tentative: Vec<Bond> = graph
        .bonds
        .iter()
        .map(|&(a, b, order)| {
            let order = order.unwrap_or(
                if graph.atoms[a].is_aromatic() && graph.atoms[b].is_aromatic() {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                },
            );
            Bond::new(a, b, order)
        })
        .collect();
    let mut adjacency = vec![Vec::new(); n];
    for (i, bond) in tentative.iter().enumerate() {
        if bond.a < n && bond.b < n && bond.a != bond.b {
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
    }
    let ring = rings::ring_bonds(n, &tentative, &adjacency);
    tentative
        .into_iter()
        .zip(&graph.bonds)
        .zip(ring)
        .map(|((mut bond, &(_, _, written)), in_ring)| {
            if written.is_none() && bond.order == BondOrder::Aromatic && !in_ring {
                bond.order = BondOrder::Single;
            }
            bond
        })
        .collect()
}

/// Parses and sanitizes a SMILES string under the default heavy-atom cap.
pub fn parse_smiles(text: &str) -> Result<Molecule, MolError> {
    parse_smiles_with_cap(text, DEFAULT_MAX_ATOMS)
}

pub fn parse_smiles_with_cap(text: &str, max_atoms: usize) -> Result<Molecule, MolError> {
    let graph = Parser { text: text.trim().as_bytes(), pos: 0, allow_dummy: false }.parse()?;
    let bonds = resolve_bonds(&graph);
    let atoms = graph
        .atoms
        .iter()
        .map(|a| match a {
            RawAtom::Real(atom) => *atom,
            RawAtom::Dummy => unreachable!("dummies rejected by the parser"),
        })
        .collect();
    Molecule::with_max_atoms(atoms, bonds, max_atoms)
}

/// A building block: the hydrogen-capped molecule plus the atoms that carried
/// `*` attachment markers.
#[derive(Debug, Clone)]
pub struct ParsedFragment {
    pub molecule: Molecule,
    pub attachments: Vec<usize>,
}

/// Parses a fragment SMILES where `*` dummy atoms mark attachment points.
/// Dummies are removed and their neighbors recorded as attachment atoms.
pub fn parse_fragment(text: &str) -> Result<ParsedFragment, MolError> {
    let graph = Parser { text: text.trim().as_bytes(), pos: 0, allow_dummy: true }.parse()?;
    let bonds = resolve_bonds(&graph);
    let mut remap = vec![usize::MAX; graph.atoms.len()];
    let mut atoms = Vec::new();
    for (i, raw) in graph.atoms.iter().enumerate() {
        if let RawAtom::Real(atom) = raw {
            remap[i] = atoms.len();
            atoms.push(*atom);
        }
    }
    let mut kept = Vec::new();
    let mut attachments = Vec::new();
    for bond in bonds {
        let dummy_a = remap[bond.a] == usize::MAX;
        let dummy_b = remap[bond.b] == usize::MAX;
        match (dummy_a, dummy_b) {
            (false, false) => kept.push(Bond::new(remap[bond.a], remap[bond.b], bond.order)),
            (true, true) => return Err(syntax(0, "two attachment points bonded together")),
            _ => {
                if bond.order != BondOrder::Single {
                    return Err(syntax(0, "attachment points must use single bonds"));
                }
                let real = if dummy_a { bond.b } else { bond.a };
                attachments.push(remap[real]);
            }
        }
    }
    let dummies = graph.atoms.iter().filter(|a| matches!(a, RawAtom::Dummy)).count();
    if dummies > 0 && attachments.len() != dummies {
        return Err(syntax(0, "attachment point must have exactly one neighbor"));
    }
    attachments.sort_unstable();
    let all_markers = attachments.clone();
    attachments.dedup();
    // Each removed marker leaves a hydrogen behind. Pinning the count keeps
    // aromatic heteroatoms such as the nitrogen in "*n1ccnc1" pyrrole-like.
    for &i in &attachments {
        let markers = all_markers.iter().filter(|&&a| a == i).count() as u8;
        let sigma: u8 = kept
            .iter()
            .filter(|b| b.a == i || b.b == i)
            .map(|b| b.order.valence())
            .sum();
        let (h, _) = hydrogen_state(&atoms[i], sigma + markers)
            .ok_or(MolError::Valence { atom: i, element: atoms[i].element })?;
        atoms[i].explicit_h = Some(h + markers);
    }
    let molecule = Molecule::new(atoms, kept)?;
    Ok(ParsedFragment { molecule, attachments })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methane() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.bond_count(), 0);
        assert_eq!(m.hydrogens(0), 4);
    }

    #[test]
    fn benzene() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(m.atom_count(), 6);
        assert!(m.atoms().iter().all(|a| a.aromatic));
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert!((0..6).all(|i| m.hydrogens(i) == 1));
    }

    #[test]
    fn acetamide_bonds() {
        let m = parse_smiles("CC(=O)N").unwrap();
        assert_eq!(m.atom_count(), 4);
        let orders: Vec<_> = m.bonds().iter().map(|b| (b.a, b.b, b.order)).collect();
        assert_eq!(
            orders,
            vec![(0, 1, BondOrder::Single), (1, 2, BondOrder::Double), (1, 3, BondOrder::Single)]
        );
        // Frozen from RDKit: heavy atoms 4, total H 5.
        let h: u32 = (0..4).map(|i| m.hydrogens(i) as u32).sum();
        assert_eq!(h, 5);
    }

    #[test]
    fn biphenyl_link_is_single() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let singles = m.bonds().iter().filter(|b| b.order == BondOrder::Single).count();
        assert_eq!(singles, 1);
    }

    #[test]
    fn bracket_atoms() {
        let m = parse_smiles("C[N+](C)(C)C").unwrap();
        assert_eq!(m.atom(1).formal_charge, 1);
        assert_eq!(m.hydrogens(1), 0);
        let m = parse_smiles("[O-]C=O").unwrap();
        assert_eq!(m.atom(0).formal_charge, -1);
        let m = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(m.hydrogens(3), 1);
    }

    #[test]
    fn two_digit_ring_labels() {
        let m = parse_smiles("C%10CCCCC%10").unwrap();
        assert_eq!(m.bond_count(), 6);
    }

    #[test]
    fn errors_report_positions() {
        assert!(matches!(parse_smiles("CC(C"), Err(MolError::Syntax { .. })));
        assert_eq!(parse_smiles("C1CC").unwrap_err(), MolError::UnmatchedRing { label: 1, pos: 1 });
        assert_eq!(
            parse_smiles("CXC").unwrap_err(),
            MolError::UnknownElement { symbol: "X".into(), pos: 1 }
        );
        assert!(matches!(parse_smiles("C(C)(C)(C)(C)C"), Err(MolError::Valence { .. })));
        assert!(matches!(parse_smiles("C.C"), Err(MolError::Disconnected { components: 2 })));
        assert!(matches!(parse_smiles("C/C=C/C"), Err(MolError::Syntax { pos: 1, .. })));
        assert!(matches!(parse_smiles("[13CH4]"), Err(MolError::Syntax { .. })));
        assert!(matches!(parse_smiles(&"C".repeat(51)), Err(MolError::TooManyAtoms { .. })));
        assert!(matches!(parse_smiles("cc"), Err(MolError::AromaticOutsideRing { .. })));
        assert_eq!(parse_smiles("").unwrap_err(), MolError::Empty);
    }

    #[test]
    fn fragment_markers() {
        let f = parse_fragment("C*").unwrap();
        assert_eq!(f.molecule.atom_count(), 1);
        assert_eq!(f.attachments, vec![0]);
        assert_eq!(f.molecule.hydrogens(0), 4);
        let f = parse_fragment("*c1ccc(*)cc1").unwrap();
        assert_eq!(f.attachments, vec![0, 3]);
        assert!(parse_smiles("C*").is_err());
    }

    #[test]
    fn aromatic_nitrogen_marker_keeps_its_hydrogen() {
        let f = parse_fragment("*n1ccnc1").unwrap();
        assert_eq!(f.molecule.canonical_smiles(), parse_smiles("c1c[nH]cn1").unwrap().canonical_smiles());
        let f = parse_fragment("*[N+](=O)[O-]").unwrap();
        assert_eq!(f.molecule.hydrogens(f.attachments[0]), 1);
    }
}
