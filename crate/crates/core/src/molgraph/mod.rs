//! Molecular graphs: atoms, bonds, sanitization, SMILES I/O, canonical
//! ordering, descriptors and circular fingerprints.
//!
//! A [`Molecule`] is immutable once built. Construction validates valences,
//! aromatic ring membership, Kekulé feasibility, connectivity and the
//! heavy-atom cap, and derives implicit hydrogen counts.

mod canon;
mod descriptors;
mod edit;
mod fingerprint;
pub mod io;
mod kekule;
mod rings;
mod smiles;
mod writer;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canon::{canonical_order, canonical_ranks};
pub use descriptors::{descriptors, DescriptorSet};
pub use edit::{cut_bond, join, MolEditor, Piece};
pub use fingerprint::{fingerprint, Fingerprint, DEFAULT_FP_BITS, DEFAULT_FP_RADIUS};
pub use kekule::kekulize;
pub use smiles::{parse_fragment, parse_smiles, parse_smiles_with_cap, ParsedFragment};
pub use writer::write_smiles;

/// Default cap on non-hydrogen atoms.
pub const DEFAULT_MAX_ATOMS: usize = 50;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MolError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unmatched ring closure {label} opened at position {pos}")]
    UnmatchedRing { label: u16, pos: usize },
    #[error("unknown element '{symbol}' at position {pos}")]
    UnknownElement { symbol: String, pos: usize },
    #[error("valence violation at atom {atom} ({element})")]
    Valence { atom: usize, element: Element },
    #[error("heavy-atom cap exceeded: {count} > {cap}")]
    TooManyAtoms { count: usize, cap: usize },
    #[error("disconnected input: {components} components")]
    Disconnected { components: usize },
    #[error("aromatic atom {atom} is not in an aromatic ring")]
    AromaticOutsideRing { atom: usize },
    #[error("aromatic system cannot be kekulized")]
    Kekulize,
    #[error("invalid bond {a}-{b}: {reason}")]
    InvalidBond { a: usize, b: usize, reason: &'static str },
    #[error("formal charge {charge} out of range on atom {atom}")]
    Charge { atom: usize, charge: i8 },
    #[error("empty molecule")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    C,
    N,
    O,
    F,
    P,
    S,
    Cl,
    Br,
    I,
    B,
}

impl Element {
    pub const ALL: [Element; 10] = [
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
        Element::I,
        Element::B,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
            Element::B => "B",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.symbol() == symbol)
    }

    /// Position in [`Element::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Standard atomic weight in daltons.
    pub fn mass(self) -> f64 {
        match self {
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::P => 30.974,
            Element::S => 32.06,
            Element::Cl => 35.45,
            Element::Br => 79.904,
            Element::I => 126.904,
            Element::B => 10.81,
        }
    }

    /// Elements that may carry a lowercase aromatic symbol.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::C | Element::N | Element::O | Element::P | Element::S | Element::B
        )
    }

    /// Allowed total valences (bond orders plus hydrogens) for a charge state,
    /// ascending. An empty slice means the charge state is not supported.
    pub fn allowed_valences(self, charge: i8) -> &'static [u8] {
        use Element::*;
        match (self, charge) {
            (C, 0) => &[4],
            (C, 1) | (C, -1) => &[3],
            (N, 0) => &[3],
            (N, 1) => &[4],
            (N, -1) => &[2],
            (O, 0) => &[2],
            (O, 1) => &[3],
            (O, -1) => &[1],
            (F | Cl | Br | I, 0) => &[1],
            (F | Cl | Br | I, -1) => &[0],
            (S, 0) => &[2, 4, 6],
            (S, 1) => &[3, 5],
            (S, -1) => &[1, 3, 5],
            (P, 0) => &[3, 5],
            (P, 1) => &[4],
            (B, 0) => &[3],
            (B, -1) => &[4],
            _ => &[],
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Hydrogen count fixed by bracket notation. `None` means the count is
    /// derived from the valence table.
    pub explicit_h: Option<u8>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom { element, formal_charge: 0, aromatic: false, explicit_h: None }
    }

    pub fn aromatic(element: Element) -> Atom {
        Atom { aromatic: true, ..Atom::new(element) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the sigma/explicit valence sum; aromatic bonds count
    /// as one, the extra pi electron is accounted per atom.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_valence(v: u8) -> Option<BondOrder> {
        match v {
            1 => Some(BondOrder::Single),
            2 => Some(BondOrder::Double),
            3 => Some(BondOrder::Triple),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Bond {
        Bond { a, b, order }
    }

    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// A sanitized, connected molecular graph with hydrogens implicit.
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    hydrogens: Vec<u8>,
    pi: Vec<bool>,
    ring_bond: Vec<bool>,
    smiles: OnceLock<String>,
}

impl Molecule {
    /// Builds and sanitizes a molecule under the default heavy-atom cap.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, MolError> {
        Molecule::with_max_atoms(atoms, bonds, DEFAULT_MAX_ATOMS)
    }

    pub fn with_max_atoms(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        max_atoms: usize,
    ) -> Result<Molecule, MolError> {
        if atoms.is_empty() {
            return Err(MolError::Empty);
        }
        if atoms.len() > max_atoms {
            return Err(MolError::TooManyAtoms { count: atoms.len(), cap: max_atoms });
        }
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a >= n || bond.b >= n {
                return Err(MolError::InvalidBond { a: bond.a, b: bond.b, reason: "index out of range" });
            }
            if bond.a == bond.b {
                return Err(MolError::InvalidBond { a: bond.a, b: bond.b, reason: "self loop" });
            }
            if adjacency[bond.a].iter().any(|&(nb, _)| nb == bond.b) {
                return Err(MolError::InvalidBond { a: bond.a, b: bond.b, reason: "duplicate bond" });
            }
            if bond.order == BondOrder::Aromatic && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic) {
                return Err(MolError::InvalidBond {
                    a: bond.a,
                    b: bond.b,
                    reason: "aromatic bond between non-aromatic atoms",
                });
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.formal_charge.abs() > 2 {
                return Err(MolError::Charge { atom: i, charge: atom.formal_charge });
            }
            if atom.aromatic && !atom.element.can_be_aromatic() {
                return Err(MolError::Valence { atom: i, element: atom.element });
            }
        }
        let components = rings::component_count(n, &adjacency);
        if components > 1 {
            return Err(MolError::Disconnected { components });
        }
        let ring_bond = rings::ring_bonds(n, &bonds, &adjacency);

        for (i, atom) in atoms.iter().enumerate() {
            if !atom.aromatic {
                continue;
            }
            let aromatic_ring_bonds = adjacency[i]
                .iter()
                .filter(|&&(_, b)| bonds[b].order == BondOrder::Aromatic && ring_bond[b])
                .count();
            if aromatic_ring_bonds < 2 {
                return Err(MolError::AromaticOutsideRing { atom: i });
            }
        }
        for (i, bond) in bonds.iter().enumerate() {
            if bond.order == BondOrder::Aromatic && !ring_bond[i] {
                return Err(MolError::AromaticOutsideRing { atom: bond.a });
            }
        }

        let mut atoms = atoms;
        let mut hydrogens = vec![0u8; n];
        let mut pi = vec![false; n];
        for i in 0..n {
            let sigma: u8 = adjacency[i].iter().map(|&(_, b)| bonds[b].order.valence()).sum();
            let (h, needs_pi) = hydrogen_state(&atoms[i], sigma).ok_or(MolError::Valence {
                atom: i,
                element: atoms[i].element,
            })?;
            // Bracket atoms whose hydrogen count matches the implicit rule are
            // normalized so that "[CH4]" and "C" build the same molecule.
            if atoms[i].explicit_h.is_some() && atoms[i].formal_charge == 0 {
                let implicit = Atom { explicit_h: None, ..atoms[i] };
                if hydrogen_state(&implicit, sigma) == Some((h, needs_pi)) {
                    atoms[i] = implicit;
                }
            }
            hydrogens[i] = h;
            pi[i] = needs_pi;
        }
        if pi.iter().any(|&p| p) && kekule::matching(&bonds, &adjacency, &pi).is_none() {
            return Err(MolError::Kekulize);
        }

        Ok(Molecule { atoms, bonds, adjacency, hydrogens, pi, ring_bond, smiles: OnceLock::new() })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn heavy_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbor, bond index)` pairs of atom `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Total hydrogens on atom `i`, implicit or bracketed.
    pub fn hydrogens(&self, i: usize) -> u8 {
        self.hydrogens[i]
    }

    /// Whether aromatic atom `i` contributes a double bond in Kekulé form.
    pub fn needs_pi(&self, i: usize) -> bool {
        self.pi[i]
    }

    pub fn is_ring_bond(&self, b: usize) -> bool {
        self.ring_bond[b]
    }

    pub fn is_ring_atom(&self, i: usize) -> bool {
        self.adjacency[i].iter().any(|&(_, b)| self.ring_bond[b])
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|&&(nb, _)| nb == b).map(|&(_, bi)| bi)
    }

    /// Number of single bonds atom `i` can still accept. New bonds replace
    /// hydrogens, so this is the hydrogen count.
    pub fn free_valence(&self, i: usize) -> u8 {
        self.hydrogens[i]
    }

    /// Canonical SMILES, computed once per molecule.
    pub fn canonical_smiles(&self) -> &str {
        self.smiles.get_or_init(|| write_smiles(self))
    }

    pub fn into_parts(self) -> (Vec<Atom>, Vec<Bond>) {
        (self.atoms, self.bonds)
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical_smiles())
    }
}

/// Hydrogen count and pi requirement for an atom with the given explicit
/// valence sum (aromatic bonds counted once). `None` on valence violation.
fn hydrogen_state(atom: &Atom, sigma: u8) -> Option<(u8, bool)> {
    let allowed = atom.element.allowed_valences(atom.formal_charge);
    let fixed = atom.explicit_h.unwrap_or(0);
    let base = sigma + fixed;
    let valence = allowed.iter().copied().find(|&v| v >= base)?;
    if atom.explicit_h.is_none() && atom.formal_charge != 0 {
        // Charged atoms only exist in bracket form.
        return None;
    }
    if atom.aromatic {
        let needs_pi = valence > base;
        let implicit = match atom.explicit_h {
            None if needs_pi => valence - base - 1,
            None => 0,
            Some(_) => 0,
        };
        Some((fixed + implicit, needs_pi))
    } else {
        let implicit = if atom.explicit_h.is_none() { valence - base } else { 0 };
        Some((fixed + implicit, false))
    }
}
