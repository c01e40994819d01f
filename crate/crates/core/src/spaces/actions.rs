use crate::molgraph::{canonical_ranks, cut_bond, join, Atom, BondOrder, Element, MolEditor, Molecule};

use super::{Action, Anchor, SearchSpace, Side, SpaceError, SpaceKind, EDIT_ELEMENTS};

const NEW_ORDERS: [BondOrder; 3] = [BondOrder::Single, BondOrder::Double, BondOrder::Triple];

/// One atom per canonical rank class, lowest index first.
fn atom_reps(ranks: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; ranks.len()];
    let mut reps = Vec::new();
    for (i, &r) in ranks.iter().enumerate() {
        if !seen[r] {
            seen[r] = true;
            reps.push(i);
        }
    }
    reps
}

/// One bond per (endpoint classes, order) key.
fn bond_reps(mol: &Molecule, ranks: &[usize]) -> Vec<usize> {
    let mut keys = Vec::new();
    let mut reps = Vec::new();
    for (k, b) in mol.bonds().iter().enumerate() {
        let (x, y) = (ranks[b.a].min(ranks[b.b]), ranks[b.a].max(ranks[b.b]));
        let key = (x, y, b.order);
        if !keys.contains(&key) {
            keys.push(key);
            reps.push(k);
        }
    }
    reps
}

/// Legal actions on `mol`, deduplicated by symmetry and sorted.
pub fn enumerate_actions(space: &SearchSpace, mol: &Molecule) -> Vec<Action> {
    let ranks = canonical_ranks(mol);
    let atoms = atom_reps(&ranks);
    let bonds = bond_reps(mol, &ranks);
    let mut out = match space.kind() {
        SpaceKind::Fragment => fragment_actions(space, mol, &ranks, &atoms, &bonds),
        SpaceKind::GraphEdit => graph_edit_candidates(space, mol, &atoms, &bonds)
            .into_iter()
            .filter(|a| apply_action(space, mol, a).is_ok())
            .collect(),
    };
    out.sort_unstable();
    out
}

fn fragment_actions(
    space: &SearchSpace,
    mol: &Molecule,
    ranks: &[usize],
    atoms: &[usize],
    bonds: &[usize],
) -> Vec<Action> {
    let lib = space.library().expect("fragment spaces carry a library");
    let n = mol.atom_count();
    let mut out = Vec::new();
    for &host in atoms {
        if mol.free_valence(host) == 0 {
            continue;
        }
        for (fi, frag) in lib.fragments.iter().enumerate() {
            if n + frag.molecule.atom_count() > space.max_atoms() {
                continue;
            }
            for &fa in &frag.attachment_reps {
                out.push(Action::FragmentAttach { fragment: fi, host_atom: host, fragment_atom: fa });
            }
        }
    }
    for &b in bonds {
        let bond = mol.bond(b);
        if bond.order != BondOrder::Single || mol.is_ring_bond(b) {
            continue;
        }
        out.push(Action::Disconnect { bond: b, keep: Side::A });
        if ranks[bond.a] != ranks[bond.b] {
            out.push(Action::Disconnect { bond: b, keep: Side::B });
        }
    }
    out
}

fn graph_edit_candidates(space: &SearchSpace, mol: &Molecule, atoms: &[usize], bonds: &[usize]) -> Vec<Action> {
    let n = mol.atom_count();
    let room = space.max_atoms().saturating_sub(n);
    let mut out = Vec::new();
    for &a in atoms {
        let h = mol.free_valence(a);
        if room >= 1 {
            for element in EDIT_ELEMENTS {
                for order in NEW_ORDERS {
                    if order.valence() <= h {
                        out.push(Action::AddAtom { element, host_atom: a, order });
                    }
                }
            }
        }
        if mol.atom(a).formal_charge == 0 {
            for element in EDIT_ELEMENTS {
                if element != mol.atom(a).element {
                    out.push(Action::MutateAtom { atom: a, element });
                }
            }
        }
        if n > 1 {
            out.push(Action::DeleteAtom { atom: a });
        }
        if h >= 1 {
            for size in [5u8, 6] {
                if usize::from(size) <= room {
                    for aromatic in [false, true] {
                        out.push(Action::FuseRing { size, aromatic, anchor: Anchor::Atom(a) });
                    }
                }
            }
        }
    }
    for &b in bonds {
        let bond = mol.bond(b);
        if bond.order != BondOrder::Aromatic {
            for order in NEW_ORDERS {
                if order != bond.order {
                    out.push(Action::MutateBond { bond: b, order });
                }
            }
            if mol.is_ring_bond(b) {
                out.push(Action::DeleteBond { bond: b });
            }
        }
        for size in [5u8, 6] {
            if usize::from(size) - 2 <= room {
                for aromatic in [false, true] {
                    if aromatic && bond.order != BondOrder::Aromatic {
                        continue;
                    }
                    out.push(Action::FuseRing { size, aromatic, anchor: Anchor::Bond(b) });
                }
            }
        }
    }
    out
}

fn illegal(action: &Action, reason: impl Into<String>) -> SpaceError {
    SpaceError::IllegalAction { action: *action, reason: reason.into() }
}

/// Applies `action` to `mol`. Actions that are out of range, belong to the
/// other kind of space, or produce an invalid molecule are rejected.
pub fn apply_action(space: &SearchSpace, mol: &Molecule, action: &Action) -> Result<Molecule, SpaceError> {
    let fragment_kind = matches!(action, Action::FragmentAttach { .. } | Action::Disconnect { .. });
    if fragment_kind != (space.kind() == SpaceKind::Fragment) {
        return Err(illegal(action, format!("not available in space {}", space.id())));
    }
    let n = mol.atom_count();
    let check_atom = |a: usize| if a < n { Ok(()) } else { Err(illegal(action, "atom index out of range")) };
    let check_bond =
        |b: usize| if b < mol.bond_count() { Ok(()) } else { Err(illegal(action, "bond index out of range")) };
    let check_element = |e: Element| {
        if EDIT_ELEMENTS.contains(&e) {
            Ok(())
        } else {
            Err(illegal(action, "element outside the edit alphabet"))
        }
    };
    let invalid = |e: crate::molgraph::MolError| illegal(action, e.to_string());
    let max = space.max_atoms();

    match *action {
        Action::FragmentAttach { fragment, host_atom, fragment_atom } => {
            check_atom(host_atom)?;
            let lib = space.library().expect("fragment spaces carry a library");
            let frag = lib.fragments.get(fragment).ok_or_else(|| illegal(action, "unknown fragment"))?;
            if !frag.attachments.contains(&fragment_atom) {
                return Err(illegal(action, "not an attachment atom"));
            }
            if n + frag.molecule.atom_count() > max {
                return Err(illegal(action, "heavy-atom cap"));
            }
            join(mol, host_atom, &frag.molecule, fragment_atom, BondOrder::Single, max).map_err(invalid)
        }
        Action::Disconnect { bond, keep } => {
            check_bond(bond)?;
            if mol.bond(bond).order != BondOrder::Single {
                return Err(illegal(action, "only single bonds are disconnected"));
            }
            let (a, b) = cut_bond(mol, bond).map_err(invalid)?;
            Ok(match keep {
                Side::A => a,
                Side::B => b,
            })
        }
        Action::AddAtom { element, host_atom, order } => {
            check_atom(host_atom)?;
            check_element(element)?;
            if order == BondOrder::Aromatic {
                return Err(illegal(action, "new bonds cannot be aromatic"));
            }
            let mut ed = MolEditor::new(mol, max);
            let new = ed.add_atom(Atom::new(element));
            ed.add_bond(host_atom, new, order).map_err(invalid)?;
            ed.build_connected().map_err(invalid)
        }
        Action::MutateAtom { atom, element } => {
            check_atom(atom)?;
            check_element(element)?;
            let old = *mol.atom(atom);
            if old.element == element || old.formal_charge != 0 {
                return Err(illegal(action, "nothing to mutate"));
            }
            let mut ed = MolEditor::new(mol, max);
            ed.set_atom(atom, Atom { element, ..old });
            ed.build_connected().map_err(invalid)
        }
        Action::MutateBond { bond, order } => {
            check_bond(bond)?;
            let old = mol.bond(bond).order;
            if old == BondOrder::Aromatic || order == BondOrder::Aromatic || old == order {
                return Err(illegal(action, "bond order cannot change that way"));
            }
            let mut ed = MolEditor::new(mol, max);
            ed.set_bond_order(bond, order).map_err(invalid)?;
            ed.build_connected().map_err(invalid)
        }
        Action::DeleteAtom { atom } => {
            check_atom(atom)?;
            if n == 1 {
                return Err(illegal(action, "cannot delete the last atom"));
            }
            let mut ed = MolEditor::new(mol, max);
            ed.remove_atom(atom).map_err(invalid)?;
            let pieces = ed.build().map_err(invalid)?;
            let best = pieces
                .into_iter()
                .map(|p| p.molecule)
                .min_by(|x, y| {
                    y.atom_count()
                        .cmp(&x.atom_count())
                        .then_with(|| x.canonical_smiles().cmp(y.canonical_smiles()))
                })
                .expect("at least one atom remains");
            Ok(best)
        }
        Action::DeleteBond { bond } => {
            check_bond(bond)?;
            if !mol.is_ring_bond(bond) || mol.bond(bond).order == BondOrder::Aromatic {
                return Err(illegal(action, "only non-aromatic ring bonds are deleted"));
            }
            let mut ed = MolEditor::new(mol, max);
            ed.remove_bond(bond).map_err(invalid)?;
            ed.build_connected().map_err(invalid)
        }
        Action::FuseRing { size, aromatic, anchor } => {
            if size != 5 && size != 6 {
                return Err(illegal(action, "ring size must be 5 or 6"));
            }
            let mut ed = MolEditor::new(mol, max);
            match anchor {
                Anchor::Bond(b) => {
                    check_bond(b)?;
                    let bond = *mol.bond(b);
                    if aromatic && bond.order != BondOrder::Aromatic {
                        return Err(illegal(action, "aromatic fusion needs an aromatic bond"));
                    }
                    let path = ring_path(&mut ed, usize::from(size) - 2, size, aromatic);
                    let order = if aromatic { BondOrder::Aromatic } else { BondOrder::Single };
                    for w in path.windows(2) {
                        ed.add_bond(w[0], w[1], order).map_err(invalid)?;
                    }
                    ed.add_bond(bond.a, path[0], order).map_err(invalid)?;
                    ed.add_bond(*path.last().expect("non-empty path"), bond.b, order).map_err(invalid)?;
                }
                Anchor::Atom(a) => {
                    check_atom(a)?;
                    let path = ring_path(&mut ed, usize::from(size), size, aromatic);
                    let order = if aromatic { BondOrder::Aromatic } else { BondOrder::Single };
                    for w in path.windows(2) {
                        ed.add_bond(w[0], w[1], order).map_err(invalid)?;
                    }
                    ed.add_bond(path[0], *path.last().expect("non-empty path"), order).map_err(invalid)?;
                    // The sulfur of a five-membered aromatic ring sits first,
                    // so the ring is joined at the carbon next to it.
                    let joint = if aromatic && size == 5 { path[1] } else { path[0] };
                    ed.add_bond(a, joint, BondOrder::Single).map_err(invalid)?;
                }
            }
            ed.build_connected().map_err(invalid)
        }
    }
}

/// New ring atoms in path order: saturated carbons, aromatic carbons, or for
/// a five-membered aromatic ring a thiophene-like path led by sulfur.
fn ring_path(ed: &mut MolEditor, count: usize, size: u8, aromatic: bool) -> Vec<usize> {
    (0..count)
        .map(|k| {
            let element = if aromatic && size == 5 && k == 0 { Element::S } else { Element::C };
            let atom = if aromatic { Atom::aromatic(element) } else { Atom::new(element) };
            ed.add_atom(atom)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{parse_smiles, Bond, DEFAULT_MAX_ATOMS};
    use crate::spaces::FragmentLibrary;

    fn canon(s: &str) -> String {
        parse_smiles(s).unwrap().canonical_smiles().to_string()
    }

    fn methyl_space() -> SearchSpace {
        SearchSpace::fragment(FragmentLibrary::parse("methyl", "C*\n").unwrap(), DEFAULT_MAX_ATOMS)
    }

    #[test]
    fn methane_has_one_attach_action() {
        let space = methyl_space();
        let methane = parse_smiles("C").unwrap();
        let actions = enumerate_actions(&space, &methane);
        assert_eq!(actions, vec![Action::FragmentAttach { fragment: 0, host_atom: 0, fragment_atom: 0 }]);
        let ethane = apply_action(&space, &methane, &actions[0]).unwrap();
        assert_eq!(ethane.canonical_smiles(), "CC");
    }

    #[test]
    fn ethane_disconnects_to_methane() {
        let space = methyl_space();
        let ethane = parse_smiles("CC").unwrap();
        let m = apply_action(&space, &ethane, &Action::Disconnect { bond: 0, keep: Side::A }).unwrap();
        assert_eq!(m.canonical_smiles(), "C");
        let actions = enumerate_actions(&space, &ethane);
        assert_eq!(actions.iter().filter(|a| matches!(a, Action::Disconnect { .. })).count(), 1);
    }

    #[test]
    fn single_atom_graph_edit() {
        let space = SearchSpace::graph_edit(DEFAULT_MAX_ATOMS);
        let actions = enumerate_actions(&space, &parse_smiles("C").unwrap());
        assert!(actions.iter().all(|a| !matches!(
            a,
            Action::DeleteBond { .. } | Action::Disconnect { .. } | Action::DeleteAtom { .. }
        )));
        let adds: Vec<_> = actions.iter().filter(|a| matches!(a, Action::AddAtom { .. })).collect();
        // C, N, O, S take single/double/triple except O (no triple);
        // halogens single only; S triple gives a hypervalent thioformyl.
        assert!(adds.contains(&&Action::AddAtom { element: Element::N, host_atom: 0, order: BondOrder::Triple }));
        assert!(!adds.contains(&&Action::AddAtom { element: Element::F, host_atom: 0, order: BondOrder::Double }));
        assert!(!adds.contains(&&Action::AddAtom { element: Element::O, host_atom: 0, order: BondOrder::Triple }));
    }

    #[test]
    fn fused_benzene_is_naphthalene() {
        let space = SearchSpace::graph_edit(DEFAULT_MAX_ATOMS);
        let benzene = parse_smiles("c1ccccc1").unwrap();
        let m = apply_action(&space, &benzene, &Action::FuseRing { size: 6, aromatic: true, anchor: Anchor::Bond(0) })
            .unwrap();
        // Hand-built: ring 0..5 plus the path 0-6-7-8-9-1.
        let atoms = vec![Atom::aromatic(Element::C); 10];
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 6), (6, 7), (7, 8), (8, 9), (9, 1)];
        let bonds = edges.iter().map(|&(a, b)| Bond::new(a, b, BondOrder::Aromatic)).collect();
        let naphthalene = Molecule::new(atoms, bonds).unwrap();
        assert_eq!(m.canonical_smiles(), naphthalene.canonical_smiles());
        assert_eq!(m.canonical_smiles(), canon("c1ccc2ccccc2c1"));
    }

    #[test]
    fn cap_blocks_growth() {
        let space = SearchSpace::graph_edit(DEFAULT_MAX_ATOMS);
        let big = parse_smiles(&"C".repeat(50)).unwrap();
        assert!(enumerate_actions(&space, &big).iter().all(|a| !a.adds_atoms()));
        let frag = SearchSpace::from_id("frag105").unwrap();
        assert!(enumerate_actions(&frag, &big).iter().all(|a| !a.adds_atoms()));
    }

    #[test]
    fn deleting_a_linker_keeps_the_larger_side() {
        let space = SearchSpace::graph_edit(DEFAULT_MAX_ATOMS);
        let m = parse_smiles("CCCOc1ccccc1").unwrap();
        let o = (0..m.atom_count()).find(|&i| m.atom(i).element == Element::O).unwrap();
        let out = apply_action(&space, &m, &Action::DeleteAtom { atom: o }).unwrap();
        assert_eq!(out.canonical_smiles(), canon("c1ccccc1"));
    }

    #[test]
    fn illegal_actions_are_errors() {
        let space = methyl_space();
        let m = parse_smiles("C").unwrap();
        assert!(apply_action(&space, &m, &Action::Disconnect { bond: 0, keep: Side::A }).is_err());
        assert!(apply_action(&space, &m, &Action::DeleteAtom { atom: 0 }).is_err());
        let ge = SearchSpace::graph_edit(DEFAULT_MAX_ATOMS);
        let neo = parse_smiles("CC(C)(C)C").unwrap();
        assert!(apply_action(&ge, &neo, &Action::AddAtom { element: Element::C, host_atom: 1, order: BondOrder::Single })
            .is_err());
    }

    #[test]
    fn pendant_rings() {
        let space = SearchSpace::graph_edit(DEFAULT_MAX_ATOMS);
        let m = parse_smiles("C").unwrap();
        let phenyl = apply_action(&space, &m, &Action::FuseRing { size: 6, aromatic: true, anchor: Anchor::Atom(0) });
        assert_eq!(phenyl.unwrap().canonical_smiles(), canon("Cc1ccccc1"));
        let thienyl = apply_action(&space, &m, &Action::FuseRing { size: 5, aromatic: true, anchor: Anchor::Atom(0) });
        assert_eq!(thienyl.unwrap().canonical_smiles(), canon("Cc1cccs1"));
        let cp = apply_action(&space, &m, &Action::FuseRing { size: 5, aromatic: false, anchor: Anchor::Atom(0) });
        assert_eq!(cp.unwrap().canonical_smiles(), canon("CC1CCCC1"));
    }
}
