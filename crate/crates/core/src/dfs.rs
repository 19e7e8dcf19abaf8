//! DFS codes and the minimum DFS code of a labeled graph.
//!
//! A DFS code lists the edges of a graph in the order a depth-first search
//! discovers them, each as `(i, j, L_i, l_ij, L_j)` over discovery indices.
//! Edges are compared with the usual gSpan order: a backward edge `(i, j)`
//! with `j < i` precedes every forward edge grown from a shallower point,
//! backward edges from the same vertex are ordered by `j`, and forward edges
//! into the same new vertex prefer deeper origins. Ties on `(i, j)` fall back
//! to the label triple. Codes compare lexicographically, so a prefix sorts
//! before its extensions and code order coincides with the pre-order of the
//! enumeration tree.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Label, LabeledGraph};

/// One tuple of a DFS code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DfsEdge {
    pub from: u32,
    pub to: u32,
    pub from_label: Label,
    pub edge_label: Label,
    pub to_label: Label,
}

impl DfsEdge {
    pub fn new(from: u32, to: u32, from_label: Label, edge_label: Label, to_label: Label) -> Self {
        DfsEdge {
            from,
            to,
            from_label,
            edge_label,
            to_label,
        }
    }

    pub fn is_forward(&self) -> bool {
        self.from < self.to
    }

    fn labels(&self) -> (Label, Label, Label) {
        (self.from_label, self.edge_label, self.to_label)
    }
}

impl Ord for DfsEdge {
    fn cmp(&self, other: &Self) -> Ordering {
        let pos = match (self.is_forward(), other.is_forward()) {
            (true, true) => self
                .to
                .cmp(&other.to)
                .then_with(|| other.from.cmp(&self.from)),
            (false, false) => self
                .from
                .cmp(&other.from)
                .then_with(|| self.to.cmp(&other.to)),
            (false, true) => {
                if self.from < other.to {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (true, false) => {
                if self.to <= other.from {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        };
        pos.then_with(|| self.labels().cmp(&other.labels()))
    }
}

impl PartialOrd for DfsEdge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DfsEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.from, self.to, self.from_label, self.edge_label, self.to_label
        )
    }
}

impl FromStr for DfsEdge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Domain(format!("DFS tuple '{s}' must have 5 fields")));
        }
        let mut v = [0u32; 5];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("invalid DFS tuple field '{p}'")))?;
        }
        Ok(DfsEdge::new(v[0], v[1], v[2], v[3], v[4]))
    }
}

/// A DFS code: the identity of a subgraph pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DfsCode(Vec<DfsEdge>);

impl DfsCode {
    pub fn new() -> Self {
        DfsCode(Vec::new())
    }

    pub fn from_edges(edges: Vec<DfsEdge>) -> Result<Self> {
        let code = DfsCode(edges);
        code.validate()?;
        Ok(code)
    }

    pub(crate) fn from_edges_unchecked(edges: Vec<DfsEdge>) -> Self {
        DfsCode(edges)
    }

    pub fn edges(&self) -> &[DfsEdge] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The code extended by one tuple.
    pub fn extended(&self, e: DfsEdge) -> DfsCode {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(e);
        DfsCode(v)
    }

    pub fn node_count(&self) -> usize {
        self.0
            .iter()
            .map(|e| e.from.max(e.to) as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Node labels indexed by discovery index.
    pub fn node_labels(&self) -> Vec<Label> {
        let mut labels = vec![0; self.node_count()];
        for e in &self.0 {
            labels[e.from as usize] = e.from_label;
            labels[e.to as usize] = e.to_label;
        }
        labels
    }

    /// Discovery indices on the right-most path, from the right-most vertex
    /// back to the root.
    pub fn rightmost_path(&self) -> Vec<u32> {
        rightmost_path(&self.0)
    }

    /// Checks the structural invariants of a DFS code (not minimality).
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.0.first() else {
            return Ok(());
        };
        if first.from != 0 || first.to != 1 {
            return Err(Error::Domain("first DFS tuple must be (0,1,..)".into()));
        }
        let mut labels: Vec<Label> = vec![first.from_label, first.to_label];
        for (k, e) in self.0.iter().enumerate().skip(1) {
            let path = rightmost_path(&self.0[..k]);
            let rightmost = path[0];
            if e.is_forward() {
                if e.to as usize != labels.len() {
                    return Err(Error::Domain(format!(
                        "forward tuple {k} must introduce vertex {}",
                        labels.len()
                    )));
                }
                if !path.contains(&e.from) {
                    return Err(Error::Domain(format!("tuple {k} does not grow from the right-most path")));
                }
                labels.push(e.to_label);
            } else {
                if e.from != rightmost || e.to >= e.from || !path.contains(&e.to) {
                    return Err(Error::Domain(format!(
                        "backward tuple {k} must join the right-most vertex to the right-most path"
                    )));
                }
                if self.0[..k].iter().any(|p| {
                    (p.from == e.from && p.to == e.to) || (p.from == e.to && p.to == e.from)
                }) {
                    return Err(Error::Domain(format!("tuple {k} repeats an edge")));
                }
                if labels[e.to as usize] != e.to_label {
                    return Err(Error::Domain(format!("tuple {k} relabels vertex {}", e.to)));
                }
            }
            if labels[e.from as usize] != e.from_label {
                return Err(Error::Domain(format!("tuple {k} relabels vertex {}", e.from)));
            }
        }
        Ok(())
    }

    /// The graph this code denotes; node `i` is discovery index `i`.
    pub fn to_graph(&self) -> LabeledGraph {
        let edges = self
            .0
            .iter()
            .map(|e| (e.from, e.to, e.edge_label))
            .collect();
        LabeledGraph::new(self.node_labels(), edges, None).expect("a valid DFS code denotes a simple graph")
    }

    /// True iff this code is the minimum DFS code of the graph it denotes.
    pub fn is_canonical(&self) -> bool {
        if self.0.len() <= 1 {
            return self.0.first().map_or(true, |e| e.from_label <= e.to_label);
        }
        matches!(
            minimum_code_search(&self.to_graph(), Some(&self.0)),
            Search::Minimal
        )
    }
}

impl fmt::Display for DfsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for DfsCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let edges = s
            .split_whitespace()
            .map(DfsEdge::from_str)
            .collect::<Result<Vec<_>>>()?;
        DfsCode::from_edges(edges)
    }
}

pub(crate) fn rightmost_path(edges: &[DfsEdge]) -> Vec<u32> {
    let Some(rightmost) = edges.iter().map(|e| e.from.max(e.to)).max() else {
        return Vec::new();
    };
    let mut path = vec![rightmost];
    let mut cur = rightmost;
    for e in edges.iter().rev() {
        if e.is_forward() && e.to == cur {
            cur = e.from;
            path.push(cur);
        }
    }
    path
}

/// Returns the minimum DFS code of a connected graph with at least one edge.
pub fn min_dfs_code(g: &LabeledGraph) -> Result<DfsCode> {
    if g.edge_count() == 0 {
        return Err(Error::Domain("graph has no edges".into()));
    }
    if !g.is_connected() {
        return Err(Error::Domain("graph is disconnected".into()));
    }
    match minimum_code_search(g, None) {
        Search::Code(code) => Ok(code),
        _ => unreachable!("search without target returns a code"),
    }
}

enum Search {
    Code(DfsCode),
    Minimal,
    NotMinimal,
}

const UNMAPPED: u32 = u32::MAX;

#[derive(Clone)]
struct Partial {
    to_graph: Vec<u32>,
    to_code: Vec<u32>,
    used: Vec<bool>,
}

/// Builds the minimum DFS code greedily: every DFS code that shares the
/// current minimal prefix continues with a right-most extension of it, so the
/// smallest extension over all embeddings of the prefix is the next tuple.
/// With a target, stops at the first tuple where the target is not minimal.
fn minimum_code_search(g: &LabeledGraph, target: Option<&[DfsEdge]>) -> Search {
    let nv = g.node_count();
    let ne = g.edge_count();

    let mut first: Option<DfsEdge> = None;
    for e in g.edges() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            let cand = DfsEdge::new(0, 1, g.node_label(a), e.label, g.node_label(b));
            if first.map_or(true, |f| cand < f) {
                first = Some(cand);
            }
        }
    }
    let first = first.expect("graph has edges");
    if let Some(t) = target {
        match first.cmp(&t[0]) {
            Ordering::Less => return Search::NotMinimal,
            Ordering::Greater => unreachable!("target is a DFS code of the graph"),
            Ordering::Equal => {}
        }
    }
    let mut partials = Vec::new();
    for (idx, e) in g.edges().iter().enumerate() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if g.node_label(a) == first.from_label
                && e.label == first.edge_label
                && g.node_label(b) == first.to_label
            {
                let mut p = Partial {
                    to_graph: vec![a, b],
                    to_code: vec![UNMAPPED; nv],
                    used: vec![false; ne],
                };
                p.to_code[a as usize] = 0;
                p.to_code[b as usize] = 1;
                p.used[idx] = true;
                partials.push(p);
            }
        }
    }
    let mut code = vec![first];

    while code.len() < ne {
        let path = rightmost_path(&code);
        let rightmost = path[0];

        let mut best: Option<DfsEdge> = None;
        for p in &partials {
            let gr = p.to_graph[rightmost as usize];
            for a in g.neighbors(gr) {
                if p.used[a.edge as usize] {
                    continue;
                }
                let j = p.to_code[a.to as usize];
                if j == UNMAPPED || !path[1..].contains(&j) {
                    continue;
                }
                let cand = DfsEdge::new(rightmost, j, g.node_label(gr), a.label, g.node_label(a.to));
                if best.map_or(true, |b| cand < b) {
                    best = Some(cand);
                }
            }
        }

        let next_partials: Vec<Partial>;
        if let Some(b) = best {
            next_partials = partials
                .into_iter()
                .filter_map(|mut p| {
                    let gr = p.to_graph[rightmost as usize];
                    let gj = p.to_graph[b.to as usize];
                    let a = g
                        .neighbors(gr)
                        .iter()
                        .find(|a| a.to == gj && a.label == b.edge_label && !p.used[a.edge as usize])?;
                    p.used[a.edge as usize] = true;
                    Some(p)
                })
                .collect();
        } else {
            let new_index = code.iter().map(|e| e.from.max(e.to)).max().unwrap() + 1;
            for p in &partials {
                for &i in &path {
                    let gi = p.to_graph[i as usize];
                    for a in g.neighbors(gi) {
                        if p.to_code[a.to as usize] != UNMAPPED {
                            continue;
                        }
                        let cand = DfsEdge::new(i, new_index, g.node_label(gi), a.label, g.node_label(a.to));
                        if best.map_or(true, |b| cand < b) {
                            best = Some(cand);
                        }
                    }
                }
            }
            let Some(b) = best else {
                break;
            };
            let mut grown = Vec::new();
            for p in &partials {
                let gi = p.to_graph[b.from as usize];
                for a in g.neighbors(gi) {
                    if p.to_code[a.to as usize] == UNMAPPED
                        && a.label == b.edge_label
                        && g.node_label(a.to) == b.to_label
                    {
                        let mut q = p.clone();
                        q.to_graph.push(a.to);
                        q.to_code[a.to as usize] = new_index;
                        q.used[a.edge as usize] = true;
                        grown.push(q);
                    }
                }
            }
            next_partials = grown;
        }

        let chosen = best.unwrap();
        if let Some(t) = target {
            match chosen.cmp(&t[code.len()]) {
                Ordering::Less => return Search::NotMinimal,
                Ordering::Greater => unreachable!("target is a DFS code of the graph"),
                Ordering::Equal => {}
            }
        }
        code.push(chosen);
        partials = next_partials;
    }

    match target {
        Some(_) => Search::Minimal,
        None => Search::Code(DfsCode(code)),
    }
}
