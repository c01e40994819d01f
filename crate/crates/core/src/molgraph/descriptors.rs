use serde::{Deserialize, Serialize};

use super::{rings, BondOrder, Element, Molecule};

const HYDROGEN_MASS: f64 = 1.008;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub molecular_weight: f64,
    pub heavy_atoms: usize,
    pub ring_count: usize,
    pub aromatic_ring_count: usize,
    pub rotatable_bonds: usize,
    pub heteroatom_fraction: f64,
    pub largest_ring_size: usize,
    /// Connected groups of rings sharing atoms.
    pub ring_systems: usize,
}

impl DescriptorSet {
    /// Rings that share at least one atom with another ring of their system.
    pub fn fused_rings(&self) -> usize {
        self.ring_count - self.ring_systems
    }
}

pub fn descriptors(mol: &Molecule) -> DescriptorSet {
    let n = mol.atom_count();
    // Summed from element counts so atom order cannot change the rounding.
    let mut counts = [0u32; Element::ALL.len()];
    let mut hydrogens = 0u32;
    for i in 0..n {
        counts[mol.atom(i).element.index()] += 1;
        hydrogens += u32::from(mol.hydrogens(i));
    }
    let molecular_weight = Element::ALL.iter().map(|e| f64::from(counts[e.index()]) * e.mass()).sum::<f64>()
        + HYDROGEN_MASS * f64::from(hydrogens);
    let ring_count = mol.bond_count() + 1 - n;

    let aromatic_atoms: Vec<usize> = (0..n).filter(|&i| mol.atom(i).aromatic).collect();
    let aromatic_bonds = mol.bonds().iter().filter(|b| b.order == BondOrder::Aromatic).count();
    let aromatic_components = subgraph_components(mol, |i| mol.atom(i).aromatic, |b| {
        mol.bond(b).order == BondOrder::Aromatic
    });
    let aromatic_ring_count = (aromatic_bonds + aromatic_components).saturating_sub(aromatic_atoms.len());

    let rotatable_bonds = (0..mol.bond_count())
        .filter(|&b| {
            let bond = mol.bond(b);
            bond.order == BondOrder::Single
                && !mol.is_ring_bond(b)
                && mol.degree(bond.a) > 1
                && mol.degree(bond.b) > 1
        })
        .count();

    let hetero = mol.atoms().iter().filter(|a| a.element != Element::C).count();
    let heteroatom_fraction = hetero as f64 / n as f64;

    let largest_ring_size = (0..mol.bond_count())
        .filter(|&b| mol.is_ring_bond(b))
        .filter_map(|b| rings::smallest_cycle_through(n, mol.bonds(), &mol.adjacency, b))
        .max()
        .unwrap_or(0);

    let ring_systems = subgraph_components(mol, |i| mol.is_ring_atom(i), |b| mol.is_ring_bond(b));

    DescriptorSet {
        molecular_weight,
        heavy_atoms: n,
        ring_count,
        aromatic_ring_count,
        rotatable_bonds,
        heteroatom_fraction,
        largest_ring_size,
        ring_systems,
    }
}

fn subgraph_components(
    mol: &Molecule,
    atom_in: impl Fn(usize) -> bool,
    bond_in: impl Fn(usize) -> bool,
) -> usize {
    let n = mol.atom_count();
    let mut seen = vec![false; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] || !atom_in(s) {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &(w, b) in mol.neighbors(v) {
                if !seen[w] && atom_in(w) && bond_in(b) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn d(s: &str) -> DescriptorSet {
        descriptors(&parse_smiles(s).unwrap())
    }

    #[test]
    fn methane() {
        let m = d("C");
        assert!((m.molecular_weight - 16.04).abs() <= 0.01);
        assert_eq!(m.heavy_atoms, 1);
        assert_eq!(m.ring_count, 0);
        assert_eq!(m.largest_ring_size, 0);
    }

    #[test]
    fn benzene() {
        let m = d("c1ccccc1");
        assert_eq!(m.ring_count, 1);
        assert_eq!(m.aromatic_ring_count, 1);
        assert_eq!(m.rotatable_bonds, 0);
        assert_eq!(m.largest_ring_size, 6);
        assert_eq!(m.heteroatom_fraction, 0.0);
    }

    #[test]
    fn butane_has_one_rotor() {
        assert_eq!(d("CCCC").rotatable_bonds, 1);
    }

    #[test]
    fn fused_and_separate_rings() {
        let naph = d("c1ccc2ccccc2c1");
        assert_eq!((naph.ring_count, naph.aromatic_ring_count, naph.ring_systems), (2, 2, 1));
        assert_eq!(naph.fused_rings(), 1);
        let biphenyl = d("c1ccccc1-c1ccccc1");
        assert_eq!((biphenyl.ring_count, biphenyl.aromatic_ring_count, biphenyl.ring_systems), (2, 2, 2));
        assert_eq!(biphenyl.rotatable_bonds, 1);
        assert_eq!(d("C1CCCCCCCCCCC1").largest_ring_size, 12);
    }

    #[test]
    fn heteroatom_fraction() {
        let m = d("CC(=O)N");
        assert!((m.heteroatom_fraction - 0.5).abs() < 1e-12);
    }
}
