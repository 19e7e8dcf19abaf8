//! Pattern containment for graphs outside the training set.

use crate::dfs::DfsCode;
use crate::graph::LabeledGraph;

const FREE: u32 = u32::MAX;

/// True iff `g` has a subgraph isomorphic to `pattern` (labels preserved,
/// injective on nodes). The search assigns graph nodes to pattern nodes one
/// code tuple at a time.
pub fn contains(g: &LabeledGraph, pattern: &DfsCode) -> bool {
    if pattern.is_empty() {
        return true;
    }
    let labels = pattern.node_labels();
    if labels.len() > g.node_count() || pattern.len() > g.edge_count() {
        return false;
    }
    if !labels.iter().all(|l| g.node_labels().contains(l)) {
        return false;
    }
    let mut to_graph = vec![FREE; labels.len()];
    let mut taken = vec![false; g.node_count()];
    let first = pattern.edges()[0];
    for root in 0..g.node_count() as u32 {
        if g.node_label(root) != first.from_label {
            continue;
        }
        to_graph[0] = root;
        taken[root as usize] = true;
        if extend(g, pattern, 0, &mut to_graph, &mut taken) {
            return true;
        }
        taken[root as usize] = false;
        to_graph[0] = FREE;
    }
    false
}

fn extend(g: &LabeledGraph, pattern: &DfsCode, k: usize, to_graph: &mut [u32], taken: &mut [bool]) -> bool {
    let Some(e) = pattern.edges().get(k) else {
        return true;
    };
    let gu = to_graph[e.from as usize];
    let mapped = to_graph[e.to as usize];
    if mapped != FREE {
        return g.edge_between(gu, mapped) == Some(e.edge_label)
            && extend(g, pattern, k + 1, to_graph, taken);
    }
    for a in g.neighbors(gu) {
        if a.label != e.edge_label || taken[a.to as usize] || g.node_label(a.to) != e.to_label {
            continue;
        }
        to_graph[e.to as usize] = a.to;
        taken[a.to as usize] = true;
        if extend(g, pattern, k + 1, to_graph, taken) {
            return true;
        }
        taken[a.to as usize] = false;
        to_graph[e.to as usize] = FREE;
    }
    false
}
