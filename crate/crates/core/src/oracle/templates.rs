//! Disconnection templates. Each matches one kind of acyclic single bond;
//! the kinds are mutually exclusive so a bond has at most one template.

use crate::molgraph::{BondOrder, Element, Molecule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    /// C(=O)–N
    Amide,
    /// C(=O)–O–C
    Ester,
    /// S(=O)(=O)–N
    Sulfonamide,
    /// aromatic c – aromatic c
    Biaryl,
    /// C–O–C with no carbonyl on the cut carbon
    Ether,
    /// C–N with no carbonyl on the carbon and a non-aromatic nitrogen
    Amine,
    /// any other C–C
    CarbonCarbon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisconnectionTemplate {
    pub name: &'static str,
    pub kind: TemplateKind,
    pub feasibility: f64,
}

impl DisconnectionTemplate {
    /// 1 − ln(feasibility); at least 1.
    pub fn step_cost(&self) -> f64 {
        1.0 - self.feasibility.ln()
    }

    /// Whether this template cuts `bond` of `mol`, which must be an acyclic
    /// single bond.
    pub fn matches(&self, mol: &Molecule, bond: usize) -> bool {
        let b = mol.bond(bond);
        if b.order != BondOrder::Single || mol.is_ring_bond(bond) {
            return false;
        }
        let (x, y) = (b.a, b.b);
        let el = |i: usize| mol.atom(i).element;
        let either = |f: &dyn Fn(usize, usize) -> bool| f(x, y) || f(y, x);
        match self.kind {
            TemplateKind::Amide => either(&|c, n| el(c) == Element::C && el(n) == Element::N && is_carbonyl(mol, c)),
            TemplateKind::Ester => either(&|c, o| {
                el(c) == Element::C && el(o) == Element::O && is_carbonyl(mol, c) && is_bridging_oxygen(mol, o)
            }),
            TemplateKind::Sulfonamide => {
                either(&|s, n| el(s) == Element::S && el(n) == Element::N && double_oxygens(mol, s) >= 2)
            }
            TemplateKind::Biaryl => {
                el(x) == Element::C && el(y) == Element::C && mol.atom(x).aromatic && mol.atom(y).aromatic
            }
            TemplateKind::Ether => either(&|c, o| {
                el(c) == Element::C && el(o) == Element::O && !is_carbonyl(mol, c) && is_bridging_oxygen(mol, o)
            }),
            TemplateKind::Amine => either(&|c, n| {
                el(c) == Element::C && el(n) == Element::N && !is_carbonyl(mol, c) && !mol.atom(n).aromatic
            }),
            TemplateKind::CarbonCarbon => {
                el(x) == Element::C && el(y) == Element::C && !(mol.atom(x).aromatic && mol.atom(y).aromatic)
            }
        }
    }
}

fn double_oxygens(mol: &Molecule, atom: usize) -> usize {
    mol.neighbors(atom)
        .iter()
        .filter(|&&(w, b)| mol.atom(w).element == Element::O && mol.bond(b).order == BondOrder::Double)
        .count()
}

fn is_carbonyl(mol: &Molecule, c: usize) -> bool {
    double_oxygens(mol, c) >= 1
}

/// Neutral two-connected oxygen between two carbons.
fn is_bridging_oxygen(mol: &Molecule, o: usize) -> bool {
    mol.atom(o).formal_charge == 0
        && mol.degree(o) == 2
        && mol.neighbors(o).iter().all(|&(w, _)| mol.atom(w).element == Element::C)
}

/// The shipped template set, most specific first.
pub fn default_templates() -> Vec<DisconnectionTemplate> {
    use TemplateKind::*;
    vec![
        DisconnectionTemplate { name: "amide", kind: Amide, feasibility: 0.9 },
        DisconnectionTemplate { name: "ester", kind: Ester, feasibility: 0.85 },
        DisconnectionTemplate { name: "sulfonamide", kind: Sulfonamide, feasibility: 0.9 },
        DisconnectionTemplate { name: "biaryl", kind: Biaryl, feasibility: 0.8 },
        DisconnectionTemplate { name: "ether", kind: Ether, feasibility: 0.6 },
        DisconnectionTemplate { name: "amine", kind: Amine, feasibility: 0.6 },
        DisconnectionTemplate { name: "carbon-carbon", kind: CarbonCarbon, feasibility: 0.2 },
    ]
}

/// First template matching `bond`, if any.
pub fn match_bond<'t>(templates: &'t [DisconnectionTemplate], mol: &Molecule, bond: usize) -> Option<&'t DisconnectionTemplate> {
    templates.iter().find(|t| t.matches(mol, bond))
}
