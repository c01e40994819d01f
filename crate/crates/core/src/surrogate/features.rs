//! Graph featurization: per-atom feature rows and directed edges.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::molgraph::{BondOrder, Element, Molecule};

/// Bump when the layout below changes; old checkpoints stop loading.
pub const SCHEMA_VERSION: u32 = 1;

const DEGREE_SLOTS: usize = 5;
const HYDROGEN_SLOTS: usize = 5;

/// Feature layout: element one-hot, degree one-hot 0..=4, formal charge,
/// aromatic flag, hydrogen-count one-hot 0..=4 per atom; bond-order one-hot
/// and ring flag per edge. Degrees and hydrogen counts above 4 share the
/// last slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: u32,
    pub elements: Vec<Element>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema { version: SCHEMA_VERSION, elements: Element::ALL.to_vec() }
    }
}

impl FeatureSchema {
    pub fn node_dim(&self) -> usize {
        self.elements.len() + DEGREE_SLOTS + 1 + 1 + HYDROGEN_SLOTS
    }

    pub fn edge_dim(&self) -> usize {
        4 + 1
    }

    /// Hex SHA-256 of the layout description.
    pub fn hash(&self) -> String {
        let symbols: Vec<&str> = self.elements.iter().map(|e| e.symbol()).collect();
        let text = format!(
            "v{};elements={};degree={DEGREE_SLOTS};charge;aromatic;hydrogens={HYDROGEN_SLOTS};edge=order4+ring",
            self.version,
            symbols.join(",")
        );
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn featurize(&self, mol: &Molecule) -> Result<GraphFeatures, Element> {
        let n = mol.atom_count();
        let nd = self.node_dim();
        let ne = self.elements.len();
        let mut nodes = vec![0.0; n * nd];
        for i in 0..n {
            let atom = mol.atom(i);
            let row = &mut nodes[i * nd..(i + 1) * nd];
            let slot = self.elements.iter().position(|&e| e == atom.element).ok_or(atom.element)?;
            row[slot] = 1.0;
            row[ne + mol.degree(i).min(DEGREE_SLOTS - 1)] = 1.0;
            row[ne + DEGREE_SLOTS] = f64::from(atom.formal_charge);
            row[ne + DEGREE_SLOTS + 1] = if atom.aromatic { 1.0 } else { 0.0 };
            row[ne + DEGREE_SLOTS + 2 + usize::from(mol.hydrogens(i)).min(HYDROGEN_SLOTS - 1)] = 1.0;
        }
        let ed = self.edge_dim();
        let mut src = Vec::with_capacity(2 * mol.bond_count());
        let mut dst = Vec::with_capacity(2 * mol.bond_count());
        let mut edges = Vec::with_capacity(2 * mol.bond_count() * ed);
        for (k, bond) in mol.bonds().iter().enumerate() {
            let mut row = [0.0; 5];
            row[match bond.order {
                BondOrder::Single => 0,
                BondOrder::Double => 1,
                BondOrder::Triple => 2,
                BondOrder::Aromatic => 3,
            }] = 1.0;
            row[4] = if mol.is_ring_bond(k) { 1.0 } else { 0.0 };
            // Directed pair 2k: a -> b, 2k + 1: b -> a.
            for (s, d) in [(bond.a, bond.b), (bond.b, bond.a)] {
                src.push(s);
                dst.push(d);
                edges.extend_from_slice(&row);
            }
        }
        Ok(GraphFeatures { n_nodes: n, nodes, src, dst, edges })
    }
}

/// Featurized molecule. Directed edges come in pairs: `e ^ 1` is the
/// reverse of `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatures {
    pub n_nodes: usize,
    /// Row-major `n_nodes × node_dim`.
    pub nodes: Vec<f64>,
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    /// Row-major `n_edges × edge_dim`.
    pub edges: Vec<f64>,
}

impl GraphFeatures {
    pub fn n_edges(&self) -> usize {
        self.src.len()
    }
}
