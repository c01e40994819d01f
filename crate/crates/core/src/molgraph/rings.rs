use std::collections::VecDeque;

use super::Bond;

pub(crate) fn component_count(n: usize, adjacency: &[Vec<(usize, usize)>]) -> usize {
    components(n, adjacency, None).iter().copied().max().map_or(0, |c| c + 1)
}

/// Component label per atom, optionally ignoring one bond.
pub(crate) fn components(
    n: usize,
    adjacency: &[Vec<(usize, usize)>],
    skip_bond: Option<usize>,
) -> Vec<usize> {
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &(w, b) in &adjacency[v] {
                if Some(b) == skip_bond || label[w] != usize::MAX {
                    continue;
                }
                label[w] = next;
                stack.push(w);
            }
        }
        next += 1;
    }
    label
}

/// Marks bonds that lie on a cycle (non-bridges), iterative Tarjan lowlink.
pub(crate) fn ring_bonds(n: usize, bonds: &[Bond], adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut is_ring = vec![true; bonds.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    // (vertex, parent bond, next neighbor cursor)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(&mut (v, parent_bond, ref mut cursor)) = stack.last_mut() {
            if *cursor < adjacency[v].len() {
                let (w, b) = adjacency[v][*cursor];
                *cursor += 1;
                if b == parent_bond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, b, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        is_ring[parent_bond] = false;
                    }
                }
            }
        }
    }
    is_ring
}

/// Size of the smallest cycle through ring bond `bond`, by BFS that avoids
/// the bond itself.
pub(crate) fn smallest_cycle_through(
    n: usize,
    bonds: &[Bond],
    adjacency: &[Vec<(usize, usize)>],
    bond: usize,
) -> Option<usize> {
    let Bond { a, b, .. } = bonds[bond];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[a] = 0;
    queue.push_back(a);
    while let Some(v) = queue.pop_front() {
        for &(w, bi) in &adjacency[v] {
            if bi == bond || dist[w] != usize::MAX {
                continue;
            }
            dist[w] = dist[v] + 1;
            if w == b {
                return Some(dist[w] + 1);
            }
            queue.push_back(w);
        }
    }
    None
}
