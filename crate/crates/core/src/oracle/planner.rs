//! A* retrosynthesis over multisets of required molecules.
//!
//! A state is the sorted list of molecules still to be made. Expanding a
//! state disconnects its first non-purchasable member with every matching
//! template; purchasable members are terminal. The path cost is the sum of
//! step costs plus the prices of the purchased leaves. Because members are
//! solved independently, expanding one member per state keeps the search
//! complete and optimal.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt::Write;
use std::rc::Rc;
use std::sync::Arc;

use crate::molgraph::{cut_bond, parse_smiles, Molecule};

use super::templates::{default_templates, match_bond, DisconnectionTemplate};
use super::Catalog;

pub const DEFAULT_NODE_BUDGET: usize = 10_000;

/// One retrosynthetic disconnection in a route.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteStep {
    pub template: &'static str,
    pub product: String,
    /// Atom indices of the cut bond in the product's parsed canonical form.
    pub bond: (usize, usize),
    pub precursors: (String, String),
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteResult {
    pub target: String,
    pub solved: bool,
    pub steps: Vec<RouteStep>,
    pub leaf_costs: Vec<(String, f64)>,
    pub nodes_expanded: usize,
    pub total_cost: f64,
}

impl RouteResult {
    pub fn leaf_price_sum(&self) -> f64 {
        self.leaf_costs.iter().map(|(_, p)| p).sum()
    }

    /// Plain-text tree, one disconnection per line, indented by depth.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.solved {
            let _ = writeln!(out, "{} (no route; {} nodes expanded)", self.target, self.nodes_expanded);
            return out;
        }
        let _ = writeln!(out, "{} (total cost {:.3}, {} steps)", self.target, self.total_cost, self.steps.len());
        let by_product: HashMap<&str, Vec<&RouteStep>> = self.steps.iter().fold(HashMap::new(), |mut m, s| {
            m.entry(s.product.as_str()).or_default().push(s);
            m
        });
        let mut used: HashMap<&str, usize> = HashMap::new();
        let prices: HashMap<&str, f64> = self.leaf_costs.iter().map(|(s, p)| (s.as_str(), *p)).collect();
        let mut stack: Vec<(&str, usize)> = vec![(self.target.as_str(), 0)];
        while let Some((smiles, depth)) = stack.pop() {
            let k = used.entry(smiles).or_insert(0);
            let step = by_product.get(smiles).and_then(|v| v.get(*k));
            let indent = "  ".repeat(depth + 1);
            match step {
                Some(step) => {
                    *k += 1;
                    let _ = writeln!(
                        out,
                        "{indent}{} [{}] => {} + {}",
                        smiles, step.template, step.precursors.0, step.precursors.1
                    );
                    stack.push((step.precursors.1.as_str(), depth + 1));
                    stack.push((step.precursors.0.as_str(), depth + 1));
                }
                None => {
                    let price = prices.get(smiles).copied().unwrap_or(f64::NAN);
                    let _ = writeln!(out, "{indent}{smiles} (buy {price:.2})");
                }
            }
        }
        out
    }
}

#[derive(Debug)]
struct Disconnection {
    template: &'static str,
    bond: (usize, usize),
    cost: f64,
    left: String,
    right: String,
}

#[derive(Debug)]
struct MolInfo {
    price: Option<f64>,
    heuristic: f64,
    disconnections: Vec<Disconnection>,
}

/// Per-call memo of catalog lookups and disconnections by canonical SMILES.
struct Memo<'p> {
    planner: &'p Planner,
    table: HashMap<String, Rc<MolInfo>>,
}

impl<'p> Memo<'p> {
    fn get(&mut self, smiles: &str, mol: Option<&Molecule>) -> Rc<MolInfo> {
        if let Some(info) = self.table.get(smiles) {
            return info.clone();
        }
        let info = Rc::new(self.planner.analyze(smiles, mol));
        self.table.insert(smiles.to_string(), info.clone());
        info
    }
}

#[derive(Debug, Clone, Copy)]
struct Cost(f64);

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for Cost {}
impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Node {
    members: Vec<String>,
    g: f64,
    parent: Option<usize>,
    step: Option<RouteStep>,
}

/// Heap entry: smallest f first, ties by smaller state key.
#[derive(PartialEq, Eq)]
struct Open {
    f: Cost,
    key: String,
    node: usize,
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.cmp(&self.f).then_with(|| other.key.cmp(&self.key))
    }
}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct Planner {
    catalog: Arc<Catalog>,
    templates: Vec<DisconnectionTemplate>,
    node_budget: usize,
    /// Per-heavy-atom price lower bound for molecules outside the catalog.
    atom_rate: f64,
}

impl Planner {
    pub fn new(catalog: Arc<Catalog>) -> Planner {
        Planner::with_templates(catalog, default_templates(), DEFAULT_NODE_BUDGET)
    }

    pub fn with_templates(catalog: Arc<Catalog>, templates: Vec<DisconnectionTemplate>, node_budget: usize) -> Planner {
        let atom_rate = 0.999 * catalog.min_price_per_atom();
        Planner { catalog, templates, node_budget, atom_rate }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn node_budget(&self) -> usize {
        self.node_budget
    }

    pub fn templates(&self) -> &[DisconnectionTemplate] {
        &self.templates
    }

    fn analyze(&self, smiles: &str, mol: Option<&Molecule>) -> MolInfo {
        if let Some(price) = self.catalog.price(smiles) {
            return MolInfo { price: Some(price), heuristic: price, disconnections: Vec::new() };
        }
        let parsed;
        let mol = match mol {
            Some(m) => m,
            None => {
                parsed = parse_smiles(smiles).expect("planner states hold valid SMILES");
                &parsed
            }
        };
        let mut disconnections = Vec::new();
        for b in 0..mol.bond_count() {
            let Some(t) = match_bond(&self.templates, mol, b) else { continue };
            let Ok((x, y)) = cut_bond(mol, b) else { continue };
            let (mut left, mut right) = (x.canonical_smiles().to_string(), y.canonical_smiles().to_string());
            if right < left {
                std::mem::swap(&mut left, &mut right);
            }
            let bond = mol.bond(b);
            disconnections.push(Disconnection { template: t.name, bond: (bond.a, bond.b), cost: t.step_cost(), left, right });
        }
        // Symmetric bonds give identical precursor pairs; keep one of each.
        disconnections.sort_by(|p, q| (&p.left, &p.right, p.template).cmp(&(&q.left, &q.right, q.template)));
        disconnections.dedup_by(|p, q| p.left == q.left && p.right == q.right && p.template == q.template);
        // At least one more step plus an admissible price bound on its atoms.
        let heuristic = 1.0 + self.atom_rate * mol.heavy_atoms() as f64;
        MolInfo { price: None, heuristic, disconnections }
    }

    fn state_h(&self, memo: &mut Memo<'_>, members: &[String]) -> Option<f64> {
        let mut h = 0.0;
        for m in members {
            let info = memo.get(m, None);
            if info.price.is_none() && info.disconnections.is_empty() {
                return None;
            }
            h += info.heuristic;
        }
        Some(h)
    }

    /// Best-first search for the cheapest route to `mol`.
    pub fn plan_route(&self, mol: &Molecule) -> RouteResult {
        let target = mol.canonical_smiles().to_string();
        let mut memo = Memo { planner: self, table: HashMap::new() };
        memo.get(&target, Some(mol));
        let unsolved = |nodes_expanded| RouteResult {
            target: target.clone(),
            solved: false,
            steps: Vec::new(),
            leaf_costs: Vec::new(),
            nodes_expanded,
            total_cost: 0.0,
        };

        let root = vec![target.clone()];
        let Some(h0) = self.state_h(&mut memo, &root) else { return unsolved(0) };
        let mut nodes = vec![Node { members: root.clone(), g: 0.0, parent: None, step: None }];
        let mut open = BinaryHeap::new();
        open.push(Open { f: Cost(h0), key: root.join("."), node: 0 });
        let mut closed: HashSet<String> = HashSet::new();
        let mut expanded = 0;

        while let Some(Open { key, node, .. }) = open.pop() {
            if !closed.insert(key) {
                continue;
            }
            if expanded == self.node_budget {
                return unsolved(expanded);
            }
            expanded += 1;
            let members = nodes[node].members.clone();
            let g = nodes[node].g;
            let pending = members.iter().position(|m| memo.get(m, None).price.is_none());
            let Some(pos) = pending else {
                return self.reconstruct(&target, &nodes, node, &mut memo, expanded);
            };
            let info = memo.get(&members[pos], None);
            for d in &info.disconnections {
                let mut next: Vec<String> = members.clone();
                next.remove(pos);
                next.push(d.left.clone());
                next.push(d.right.clone());
                next.sort_unstable();
                let Some(h) = self.state_h(&mut memo, &next) else { continue };
                let key = next.join(".");
                if closed.contains(&key) {
                    continue;
                }
                let g_next = g + d.cost;
                nodes.push(Node {
                    members: next,
                    g: g_next,
                    parent: Some(node),
                    step: Some(RouteStep {
                        template: d.template,
                        product: members[pos].clone(),
                        bond: d.bond,
                        precursors: (d.left.clone(), d.right.clone()),
                        cost: d.cost,
                    }),
                });
                open.push(Open { f: Cost(g_next + h), key, node: nodes.len() - 1 });
            }
        }
        unsolved(expanded)
    }

    fn reconstruct(&self, target: &str, nodes: &[Node], goal: usize, memo: &mut Memo<'_>, expanded: usize) -> RouteResult {
        let mut steps = Vec::new();
        let mut at = Some(goal);
        while let Some(i) = at {
            if let Some(step) = &nodes[i].step {
                steps.push(step.clone());
            }
            at = nodes[i].parent;
        }
        steps.reverse();
        let leaf_costs: Vec<(String, f64)> = nodes[goal]
            .members
            .iter()
            .map(|m| (m.clone(), memo.get(m, None).price.expect("goal members are purchasable")))
            .collect();
        let total_cost = nodes[goal].g + leaf_costs.iter().map(|(_, p)| p).sum::<f64>();
        RouteResult {
            target: target.to_string(),
            solved: true,
            steps,
            leaf_costs,
            nodes_expanded: expanded,
            total_cost,
        }
    }

    /// Reference minimum route cost by memoized recursion over every
    /// disconnection; `None` when no route exists. Independent of the A*
    /// queue, heuristic and budget.
    pub fn exhaustive_cost(&self, mol: &Molecule) -> Option<f64> {
        fn solve(p: &Planner, smiles: &str, mol: Option<&Molecule>, memo: &mut HashMap<String, Option<f64>>) -> Option<f64> {
            if let Some(&c) = memo.get(smiles) {
                return c;
            }
            let cost = if let Some(price) = p.catalog.price(smiles) {
                Some(price)
            } else {
                let parsed;
                let mol = match mol {
                    Some(m) => m,
                    None => {
                        parsed = parse_smiles(smiles).expect("valid SMILES");
                        &parsed
                    }
                };
                let mut best: Option<f64> = None;
                for b in 0..mol.bond_count() {
                    let Some(t) = match_bond(&p.templates, mol, b) else { continue };
                    let Ok((x, y)) = cut_bond(mol, b) else { continue };
                    let cx = solve(p, x.canonical_smiles(), Some(&x), memo);
                    let cy = solve(p, y.canonical_smiles(), Some(&y), memo);
                    if let (Some(cx), Some(cy)) = (cx, cy) {
                        let c = t.step_cost() + cx + cy;
                        best = Some(best.map_or(c, |b: f64| b.min(c)));
                    }
                }
                best
            };
            memo.insert(smiles.to_string(), cost);
            cost
        }
        solve(self, mol.canonical_smiles(), Some(mol), &mut HashMap::new())
    }

    /// Number of distinct molecules reachable by repeated disconnection,
    /// stopping at catalog members, or `None` once it exceeds `limit`.
    pub fn disconnection_tree_size(&self, mol: &Molecule, limit: usize) -> Option<usize> {
        let mut seen: HashSet<String> = HashSet::new();
        let mut stack = vec![mol.clone()];
        seen.insert(mol.canonical_smiles().to_string());
        while let Some(m) = stack.pop() {
            if self.catalog.contains(m.canonical_smiles()) {
                continue;
            }
            for b in 0..m.bond_count() {
                if match_bond(&self.templates, &m, b).is_none() {
                    continue;
                }
                let Ok((x, y)) = cut_bond(&m, b) else { continue };
                for piece in [x, y] {
                    if seen.insert(piece.canonical_smiles().to_string()) {
                        if seen.len() > limit {
                            return None;
                        }
                        stack.push(piece);
                    }
                }
            }
        }
        Some(seen.len())
    }
}
