//! Labeled undirected graphs and the line-based dataset format.
//!
//! ```text
//! t # <graph-id> <label>
//! v <node-index> <node-label>
//! e <u> <v> <edge-label>
//! ```
//!
//! Node indices are 0-based and contiguous within a graph. Lines starting
//! with `#` and blank lines are ignored.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Node and edge labels are small non-negative integers.
pub type Label = u32;

/// An undirected edge stored with `u <= v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub label: Label,
}

/// One adjacency entry: neighbour, edge label, and index into the edge list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Adjacent {
    pub to: u32,
    pub label: Label,
    pub edge: u32,
}

/// A finite undirected graph with labeled nodes and edges.
///
/// No self-loops and no parallel edges. Connectivity is checked where it
/// matters (dataset ingestion, [`crate::dfs::min_dfs_code`]) rather than
/// being a property of the type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    nodes: Vec<Label>,
    edges: Vec<Edge>,
    id: Option<i64>,
    adjacency: Vec<Vec<Adjacent>>,
}

impl LabeledGraph {
    /// Builds a graph, normalising every edge to `u <= v`.
    pub fn new(nodes: Vec<Label>, edges: Vec<(u32, u32, Label)>, id: Option<i64>) -> Result<Self> {
        let mut g = LabeledGraph {
            adjacency: vec![Vec::new(); nodes.len()],
            nodes,
            edges: Vec::with_capacity(edges.len()),
            id,
        };
        for (u, v, l) in edges {
            g.add_edge(u, v, l)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_label(&self, v: u32) -> Label {
        self.nodes[v as usize]
    }

    pub fn node_labels(&self) -> &[Label] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn id(&self) -> Option<i64> {
        self.id
    }

    pub fn set_id(&mut self, id: Option<i64>) {
        self.id = id;
    }

    pub fn neighbors(&self, v: u32) -> &[Adjacent] {
        &self.adjacency[v as usize]
    }

    /// Label of the edge between `u` and `v`, if any.
    pub fn edge_between(&self, u: u32, v: u32) -> Option<Label> {
        self.adjacency[u as usize]
            .iter()
            .find(|a| a.to == v)
            .map(|a| a.label)
    }

    pub fn add_node(&mut self, label: Label) -> u32 {
        self.nodes.push(label);
        self.adjacency.push(Vec::new());
        (self.nodes.len() - 1) as u32
    }

    pub fn add_edge(&mut self, u: u32, v: u32, label: Label) -> Result<()> {
        let n = self.nodes.len() as u32;
        if u >= n || v >= n {
            return Err(Error::Structure(format!(
                "edge ({u},{v}) references a node outside 0..{n}"
            )));
        }
        if u == v {
            return Err(Error::Structure(format!("self-loop on node {u}")));
        }
        if self.edge_between(u, v).is_some() {
            return Err(Error::Structure(format!("parallel edge ({u},{v})")));
        }
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let idx = self.edges.len() as u32;
        self.edges.push(Edge { u: a, v: b, label });
        self.adjacency[a as usize].push(Adjacent { to: b, label, edge: idx });
        self.adjacency[b as usize].push(Adjacent { to: a, label, edge: idx });
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for a in self.neighbors(v) {
                if !seen[a.to as usize] {
                    seen[a.to as usize] = true;
                    count += 1;
                    queue.push_back(a.to);
                }
            }
        }
        count == self.nodes.len()
    }

    /// Relabels node `i` as `perm[i]`. Labels and edges are carried along.
    pub fn permuted(&self, perm: &[u32]) -> LabeledGraph {
        assert_eq!(perm.len(), self.nodes.len());
        let mut nodes = vec![0; self.nodes.len()];
        for (i, &p) in perm.iter().enumerate() {
            nodes[p as usize] = self.nodes[i];
        }
        let edges = self
            .edges
            .iter()
            .map(|e| (perm[e.u as usize], perm[e.v as usize], e.label))
            .collect();
        LabeledGraph::new(nodes, edges, self.id).expect("permutation preserves validity")
    }
}

/// Graphs with one response value each.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDataset {
    pub graphs: Vec<LabeledGraph>,
    pub labels: Vec<f64>,
}

impl GraphDataset {
    pub fn new(graphs: Vec<LabeledGraph>, labels: Vec<f64>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::NoGraphs);
        }
        if graphs.len() != labels.len() {
            return Err(Error::Structure(format!(
                "{} graphs but {} labels",
                graphs.len(),
                labels.len()
            )));
        }
        Ok(GraphDataset { graphs, labels })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Rejects disconnected graphs, naming the first offender.
    pub fn check_connected(&self) -> Result<()> {
        for (i, g) in self.graphs.iter().enumerate() {
            if !g.is_connected() {
                return Err(Error::Disconnected {
                    id: g.id().unwrap_or(i as i64),
                });
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_dataset(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, write_dataset(self))?;
        Ok(())
    }

    /// Keeps the graphs at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<GraphDataset> {
        GraphDataset::new(
            indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

/// Parses the line-based dataset format.
pub fn parse_dataset(text: &str) -> Result<GraphDataset> {
    struct Pending {
        id: i64,
        label: f64,
        nodes: Vec<Label>,
        edges: Vec<(u32, u32, Label)>,
        line: usize,
    }

    fn finish(p: Pending, graphs: &mut Vec<LabeledGraph>, labels: &mut Vec<f64>) -> Result<()> {
        if p.nodes.is_empty() {
            return Err(Error::Structure(format!("graph {} has no nodes", p.id)));
        }
        let g = LabeledGraph::new(p.nodes, p.edges, Some(p.id)).map_err(|e| match e {
            Error::Structure(msg) => Error::parse(p.line, format!("graph {}: {msg}", p.id)),
            other => other,
        })?;
        if !g.is_connected() {
            return Err(Error::Disconnected { id: p.id });
        }
        graphs.push(g);
        labels.push(p.label);
        Ok(())
    }

    fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
        let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
    }

    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    let mut current: Option<Pending> = None;
    let mut ids = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("t") => {
                if let Some(p) = current.take() {
                    finish(p, &mut graphs, &mut labels)?;
                }
                if toks.next() != Some("#") {
                    return Err(Error::parse(lineno, "expected 't # <graph-id> <label>'"));
                }
                let id: i64 = number(toks.next(), lineno, "graph id")?;
                let label: f64 = match toks.next() {
                    Some(tok) => tok
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("invalid label '{tok}'")))?,
                    None => {
                        return Err(Error::Structure(format!(
                            "graph {id} (line {lineno}) has no response label"
                        )))
                    }
                };
                if !label.is_finite() {
                    return Err(Error::parse(lineno, "label must be finite"));
                }
                if !ids.insert(id) {
                    return Err(Error::parse(lineno, format!("duplicate graph id {id}")));
                }
                current = Some(Pending {
                    id,
                    label,
                    nodes: Vec::new(),
                    edges: Vec::new(),
                    line: lineno,
                });
            }
            Some("v") => {
                let p = current
                    .as_mut()
                    .ok_or_else(|| Error::parse(lineno, "'v' line before any 't' line"))?;
                let index: usize = number(toks.next(), lineno, "node index")?;
                let label: Label = number(toks.next(), lineno, "node label")?;
                if index != p.nodes.len() {
                    return Err(Error::parse(
                        lineno,
                        format!("node index {index} out of order (expected {})", p.nodes.len()),
                    ));
                }
                p.nodes.push(label);
            }
            Some("e") => {
                let p = current
                    .as_mut()
                    .ok_or_else(|| Error::parse(lineno, "'e' line before any 't' line"))?;
                let u: u32 = number(toks.next(), lineno, "edge endpoint")?;
                let v: u32 = number(toks.next(), lineno, "edge endpoint")?;
                let label: Label = number(toks.next(), lineno, "edge label")?;
                let n = p.nodes.len() as u32;
                if u >= n || v >= n {
                    return Err(Error::parse(lineno, format!("edge ({u},{v}) references an undeclared node")));
                }
                if u == v {
                    return Err(Error::parse(lineno, format!("self-loop on node {u}")));
                }
                let dup = p
                    .edges
                    .iter()
                    .any(|&(a, b, _)| (a == u && b == v) || (a == v && b == u));
                if dup {
                    return Err(Error::parse(lineno, format!("parallel edge ({u},{v})")));
                }
                p.edges.push((u, v, label));
            }
            Some(tok) => {
                return Err(Error::parse(lineno, format!("unknown record type '{tok}'")));
            }
            None => unreachable!("blank lines are skipped"),
        }
    }
    if let Some(p) = current.take() {
        finish(p, &mut graphs, &mut labels)?;
    }
    GraphDataset::new(graphs, labels)
}

/// Writes a dataset in the format read by [`parse_dataset`].
pub fn write_dataset(dataset: &GraphDataset) -> String {
    let mut out = String::new();
    for (i, (g, y)) in dataset.graphs.iter().zip(&dataset.labels).enumerate() {
        let id = g.id().unwrap_or(i as i64);
        let _ = writeln!(out, "t # {id} {y}");
        for (v, l) in g.node_labels().iter().enumerate() {
            let _ = writeln!(out, "v {v} {l}");
        }
        for e in g.edges() {
            let _ = writeln!(out, "e {} {} {}", e.u, e.v, e.label);
        }
    }
    out
}
