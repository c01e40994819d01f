//! Structural edits with consistent hydrogen bookkeeping.
//!
//! Atoms that gain a bond give up a hydrogen and atoms that lose one get a
//! hydrogen back. The count is pinned through the bracket hydrogen field, so
//! aromatic atoms keep their pi assignment across the edit; sanitization
//! folds pinned counts back into implicit form wherever they agree.

use super::{rings, Atom, Bond, BondOrder, MolError, Molecule};

/// One connected piece of an edited molecule.
#[derive(Debug, Clone)]
pub struct Piece {
    pub molecule: Molecule,
    /// Editor atom index of every atom in `molecule`, in order.
    pub origin: Vec<usize>,
}

impl Piece {
    pub fn contains(&self, atom: usize) -> bool {
        self.origin.contains(&atom)
    }
}

#[derive(Debug, Clone)]
pub struct MolEditor {
    atoms: Vec<Atom>,
    /// Tracked hydrogen count; `None` for atoms whose count is left to the
    /// valence table.
    hydrogens: Vec<Option<i16>>,
    removed: Vec<bool>,
    bonds: Vec<Option<Bond>>,
    max_atoms: usize,
}

impl MolEditor {
    pub fn new(mol: &Molecule, max_atoms: usize) -> MolEditor {
        let mut editor = MolEditor {
            atoms: Vec::with_capacity(mol.atom_count() + 6),
            hydrogens: Vec::with_capacity(mol.atom_count() + 6),
            removed: Vec::new(),
            bonds: Vec::with_capacity(mol.bond_count() + 6),
            max_atoms,
        };
        editor.append(mol);
        editor
    }

    pub fn atom_count(&self) -> usize {
        self.removed.iter().filter(|&&r| !r).count()
    }

    /// Copies `mol` in as a disconnected part; returns the index offset.
    pub fn append(&mut self, mol: &Molecule) -> usize {
        let offset = self.atoms.len();
        for i in 0..mol.atom_count() {
            self.atoms.push(*mol.atom(i));
            self.hydrogens.push(Some(i16::from(mol.hydrogens(i))));
            self.removed.push(false);
        }
        for b in mol.bonds() {
            self.bonds.push(Some(Bond::new(b.a + offset, b.b + offset, b.order)));
        }
        offset
    }

    /// Adds an atom whose hydrogens follow the valence table.
    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.hydrogens.push(None);
        self.removed.push(false);
        self.atoms.len() - 1
    }

    pub fn set_atom(&mut self, i: usize, atom: Atom) {
        self.atoms[i] = atom;
        self.hydrogens[i] = atom.explicit_h.map(i16::from);
    }

    fn shift_h(&mut self, i: usize, delta: i16) -> Result<(), MolError> {
        if let Some(h) = &mut self.hydrogens[i] {
            *h += delta;
            if *h < 0 {
                return Err(MolError::Valence { atom: i, element: self.atoms[i].element });
            }
        }
        Ok(())
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, MolError> {
        let v = i16::from(order.valence());
        self.shift_h(a, -v)?;
        self.shift_h(b, -v)?;
        self.bonds.push(Some(Bond::new(a, b, order)));
        Ok(self.bonds.len() - 1)
    }

    pub fn remove_bond(&mut self, bond: usize) -> Result<(), MolError> {
        let b = self.bonds[bond].take().ok_or(MolError::InvalidBond { a: 0, b: 0, reason: "bond already removed" })?;
        let v = i16::from(b.order.valence());
        self.shift_h(b.a, v)?;
        self.shift_h(b.b, v)
    }

    pub fn set_bond_order(&mut self, bond: usize, order: BondOrder) -> Result<(), MolError> {
        let b = self.bonds[bond].ok_or(MolError::InvalidBond { a: 0, b: 0, reason: "bond already removed" })?;
        let delta = i16::from(b.order.valence()) - i16::from(order.valence());
        self.shift_h(b.a, delta)?;
        self.shift_h(b.b, delta)?;
        self.bonds[bond] = Some(Bond { order, ..b });
        Ok(())
    }

    pub fn remove_atom(&mut self, i: usize) -> Result<(), MolError> {
        let incident: Vec<usize> = (0..self.bonds.len())
            .filter(|&k| self.bonds[k].is_some_and(|b| b.a == i || b.b == i))
            .collect();
        for k in incident {
            self.remove_bond(k)?;
        }
        self.removed[i] = true;
        Ok(())
    }

    /// Sanitizes every connected piece, ordered by lowest editor index.
    pub fn build(self) -> Result<Vec<Piece>, MolError> {
        let n = self.atoms.len();
        let live: Vec<Bond> = self.bonds.iter().flatten().copied().collect();
        let mut adjacency = vec![Vec::new(); n];
        for (k, b) in live.iter().enumerate() {
            adjacency[b.a].push((b.b, k));
            adjacency[b.b].push((b.a, k));
        }
        let label = rings::components(n, &adjacency, None);
        let mut order: Vec<usize> = Vec::new();
        for (&gone, &comp) in self.removed.iter().zip(&label) {
            if !gone && !order.contains(&comp) {
                order.push(comp);
            }
        }
        let mut pieces = Vec::with_capacity(order.len());
        for comp in order {
            let origin: Vec<usize> = (0..n).filter(|&i| !self.removed[i] && label[i] == comp).collect();
            let mut remap = vec![usize::MAX; n];
            for (new, &old) in origin.iter().enumerate() {
                remap[old] = new;
            }
            let atoms: Vec<Atom> = origin
                .iter()
                .map(|&i| match self.hydrogens[i] {
                    Some(h) => Atom { explicit_h: Some(h as u8), ..self.atoms[i] },
                    None => self.atoms[i],
                })
                .collect();
            let bonds: Vec<Bond> = live
                .iter()
                .filter(|b| label[b.a] == comp)
                .map(|b| Bond::new(remap[b.a], remap[b.b], b.order))
                .collect();
            let molecule = Molecule::with_max_atoms(atoms, bonds, self.max_atoms)?;
            pieces.push(Piece { molecule, origin });
        }
        Ok(pieces)
    }

    /// Builds a molecule that must come out as a single piece.
    pub fn build_connected(self) -> Result<Molecule, MolError> {
        let mut pieces = self.build()?;
        match pieces.len() {
            1 => Ok(pieces.pop().expect("one piece").molecule),
            0 => Err(MolError::Empty),
            components => Err(MolError::Disconnected { components }),
        }
    }
}

/// Cuts an acyclic bond; returns the pieces holding its first and second
/// endpoint, each capped with hydrogen.
pub fn cut_bond(mol: &Molecule, bond: usize) -> Result<(Molecule, Molecule), MolError> {
    let b = *mol.bond(bond);
    let mut editor = MolEditor::new(mol, mol.atom_count());
    editor.remove_bond(bond)?;
    let pieces = editor.build()?;
    if pieces.len() != 2 {
        return Err(MolError::InvalidBond { a: b.a, b: b.b, reason: "bond lies on a ring" });
    }
    let mut it = pieces.into_iter();
    let (first, second) = (it.next().expect("two pieces"), it.next().expect("two pieces"));
    if first.contains(b.a) {
        Ok((first.molecule, second.molecule))
    } else {
        Ok((second.molecule, first.molecule))
    }
}

/// Joins two molecules by a new bond between `a_atom` of `a` and `b_atom` of
/// `b`, each giving up hydrogens.
pub fn join(
    a: &Molecule,
    a_atom: usize,
    b: &Molecule,
    b_atom: usize,
    order: BondOrder,
    max_atoms: usize,
) -> Result<Molecule, MolError> {
    let mut editor = MolEditor::new(a, max_atoms);
    let offset = editor.append(b);
    editor.add_bond(a_atom, b_atom + offset, order)?;
    editor.build_connected()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{parse_smiles, DEFAULT_MAX_ATOMS};

    fn canon(s: &str) -> String {
        parse_smiles(s).unwrap().canonical_smiles().to_string()
    }

    #[test]
    fn join_then_cut() {
        let benzene = parse_smiles("c1ccccc1").unwrap();
        let methane = parse_smiles("C").unwrap();
        let toluene = join(&benzene, 0, &methane, 0, BondOrder::Single, DEFAULT_MAX_ATOMS).unwrap();
        assert_eq!(toluene.canonical_smiles(), canon("Cc1ccccc1"));
        let bridge = (0..toluene.bond_count()).find(|&b| !toluene.is_ring_bond(b)).unwrap();
        let (x, y) = cut_bond(&toluene, bridge).unwrap();
        let mut got = vec![x.canonical_smiles().to_string(), y.canonical_smiles().to_string()];
        got.sort();
        let mut want = vec![canon("C"), canon("c1ccccc1")];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn cutting_n_aryl_bond_restores_nh() {
        let m = parse_smiles("Cn1ccnc1").unwrap();
        let bridge = (0..m.bond_count()).find(|&b| !m.is_ring_bond(b)).unwrap();
        let (a, b) = cut_bond(&m, bridge).unwrap();
        let pieces = [a.canonical_smiles().to_string(), b.canonical_smiles().to_string()];
        assert!(pieces.contains(&canon("c1c[nH]cn1")), "{pieces:?}");
    }

    #[test]
    fn ring_bond_cannot_be_cut() {
        let m = parse_smiles("C1CCCCC1").unwrap();
        assert!(cut_bond(&m, 0).is_err());
    }

    #[test]
    fn saturated_atom_cannot_gain_bond() {
        let m = parse_smiles("C(C)(C)(C)C").unwrap();
        let c = parse_smiles("C").unwrap();
        assert!(join(&m, 0, &c, 0, BondOrder::Single, DEFAULT_MAX_ATOMS).is_err());
    }
}
