//! Search spaces: fragment assembly over a building-block library, and
//! atom-level graph editing. Both enumerate legal actions on a molecule and
//! apply them to produce a new sanitized molecule.

mod actions;
mod library;

use std::fmt;
use std::io;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{parse_smiles, BondOrder, Element, MolError, Molecule, DEFAULT_MAX_ATOMS};

pub use actions::{apply_action, enumerate_actions};
pub use library::{Fragment, FragmentLibrary};

/// Elements the graph-edit space may add or mutate to.
pub const EDIT_ELEMENTS: [Element; 7] =
    [Element::C, Element::N, Element::O, Element::F, Element::S, Element::Cl, Element::Br];

const MAX_RESTARTS: usize = 16;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: MolError },
    #[error("line {line}: fragment has no attachment point")]
    NoAttachment { line: usize },
    #[error("empty library")]
    EmptyLibrary,
    #[error("unknown search space '{0}'")]
    UnknownSpace(String),
    #[error("illegal action {action}: {reason}")]
    IllegalAction { action: Action, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Anchor {
    /// Fused ring sharing this bond.
    Bond(usize),
    /// Pendant ring joined to this atom by a single bond.
    Atom(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    FragmentAttach { fragment: usize, host_atom: usize, fragment_atom: usize },
    Disconnect { bond: usize, keep: Side },
    AddAtom { element: Element, host_atom: usize, order: BondOrder },
    MutateAtom { atom: usize, element: Element },
    MutateBond { bond: usize, order: BondOrder },
    DeleteAtom { atom: usize },
    DeleteBond { bond: usize },
    FuseRing { size: u8, aromatic: bool, anchor: Anchor },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    FragmentAttach,
    Disconnect,
    AddAtom,
    MutateAtom,
    MutateBond,
    DeleteAtom,
    DeleteBond,
    FuseRing,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::FragmentAttach { .. } => ActionKind::FragmentAttach,
            Action::Disconnect { .. } => ActionKind::Disconnect,
            Action::AddAtom { .. } => ActionKind::AddAtom,
            Action::MutateAtom { .. } => ActionKind::MutateAtom,
            Action::MutateBond { .. } => ActionKind::MutateBond,
            Action::DeleteAtom { .. } => ActionKind::DeleteAtom,
            Action::DeleteBond { .. } => ActionKind::DeleteBond,
            Action::FuseRing { .. } => ActionKind::FuseRing,
        }
    }

    /// Whether the action can only grow the molecule.
    pub fn adds_atoms(&self) -> bool {
        matches!(self, Action::FragmentAttach { .. } | Action::AddAtom { .. } | Action::FuseRing { .. })
    }
}

fn order_name(order: BondOrder) -> &'static str {
    match order {
        BondOrder::Single => "single",
        BondOrder::Double => "double",
        BondOrder::Triple => "triple",
        BondOrder::Aromatic => "aromatic",
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Action::FragmentAttach { fragment, host_atom, fragment_atom } => {
                write!(f, "attach:f{fragment}:h{host_atom}:a{fragment_atom}")
            }
            Action::Disconnect { bond, keep } => write!(f, "disconnect:b{bond}:{keep:?}"),
            Action::AddAtom { element, host_atom, order } => {
                write!(f, "add_atom:{element}:h{host_atom}:{}", order_name(order))
            }
            Action::MutateAtom { atom, element } => write!(f, "mutate_atom:a{atom}:{element}"),
            Action::MutateBond { bond, order } => write!(f, "mutate_bond:b{bond}:{}", order_name(order)),
            Action::DeleteAtom { atom } => write!(f, "delete_atom:a{atom}"),
            Action::DeleteBond { bond } => write!(f, "delete_bond:b{bond}"),
            Action::FuseRing { size, aromatic, anchor } => {
                let kind = if aromatic { "aromatic" } else { "aliphatic" };
                match anchor {
                    Anchor::Bond(b) => write!(f, "fuse_ring:{size}:{kind}:b{b}"),
                    Anchor::Atom(a) => write!(f, "fuse_ring:{size}:{kind}:a{a}"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Fragment,
    GraphEdit,
}

#[derive(Debug, Clone)]
pub struct SearchSpace {
    id: String,
    kind: SpaceKind,
    library: Option<Arc<FragmentLibrary>>,
    max_atoms: usize,
}

impl SearchSpace {
    pub fn fragment(library: FragmentLibrary, max_atoms: usize) -> SearchSpace {
        SearchSpace {
            id: library.name.clone(),
            kind: SpaceKind::Fragment,
            library: Some(Arc::new(library)),
            max_atoms,
        }
    }

    pub fn graph_edit(max_atoms: usize) -> SearchSpace {
        SearchSpace { id: "graph_edit".into(), kind: SpaceKind::GraphEdit, library: None, max_atoms }
    }

    /// `frag105`, `frag464` or `graph_edit`, with the default atom cap.
    pub fn from_id(id: &str) -> Result<SearchSpace, SpaceError> {
        if id == "graph_edit" {
            return Ok(SearchSpace::graph_edit(DEFAULT_MAX_ATOMS));
        }
        FragmentLibrary::builtin(id)
            .map(|lib| SearchSpace::fragment(lib, DEFAULT_MAX_ATOMS))
            .ok_or_else(|| SpaceError::UnknownSpace(id.to_string()))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn library(&self) -> Option<&FragmentLibrary> {
        self.library.as_deref()
    }

    pub fn max_atoms(&self) -> usize {
        self.max_atoms
    }
}

fn starting_molecule<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R) -> Molecule {
    match space.library() {
        Some(lib) => lib.fragments[rng.random_range(0..lib.len())].molecule.clone(),
        None => parse_smiles("C").expect("methane parses"),
    }
}

/// Starts from a single carbon (graph edit) or a random library fragment and
/// applies `n_init` random legal actions. A draw that reaches a state with no
/// legal action restarts, up to a fixed number of times.
pub fn random_molecule<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R, n_init: usize) -> Molecule {
    let mut mol = starting_molecule(space, rng);
    for _ in 0..MAX_RESTARTS {
        let mut stuck = false;
        for _ in 0..n_init {
            let actions = enumerate_actions(space, &mol);
            if actions.is_empty() {
                stuck = true;
                break;
            }
            let action = actions[rng.random_range(0..actions.len())];
            mol = apply_action(space, &mol, &action).expect("enumerated actions apply");
        }
        if !stuck {
            return mol;
        }
        mol = starting_molecule(space, rng);
    }
    mol
}
