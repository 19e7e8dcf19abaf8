//! The enumeration tree over all subgraph patterns of a dataset.
//!
//! Nodes are canonical DFS codes with support at least one; the children of a
//! node are its right-most extensions that are still canonical. Each node
//! carries its embeddings into the training graphs, so indicator vectors of
//! children come from extending embeddings rather than from isomorphism tests.
//! Only the current root-to-node path (and the pending siblings along it) is
//! held in memory.

use std::collections::{BTreeMap, HashMap};

use crate::dfs::{DfsCode, DfsEdge};
use crate::error::Result;
use crate::graph::GraphDataset;
use crate::indicator::IndicatorVector;

/// A visited pattern together with its embeddings.
#[derive(Clone, Debug)]
pub struct PatternNode {
    pub code: DfsCode,
    pub indicator: IndicatorVector,
    /// Position in first-visit DFS order within one traversal.
    pub pattern_index: usize,
    redundant: bool,
    gids: Vec<u32>,
    nodes: Vec<u32>,
    edges: Vec<u32>,
}

/// One embedding: target graph, image of each pattern node (by discovery
/// index) and image of each code tuple.
#[derive(Clone, Copy, Debug)]
pub struct Embedding<'a> {
    pub graph: usize,
    pub nodes: &'a [u32],
    pub edges: &'a [u32],
}

impl PatternNode {
    pub fn support(&self) -> usize {
        self.indicator.support()
    }

    pub fn embedding_count(&self) -> usize {
        self.gids.len()
    }

    pub fn embedding(&self, k: usize) -> Embedding<'_> {
        let nn = self.code.node_count();
        let ne = self.code.len();
        Embedding {
            graph: self.gids[k] as usize,
            nodes: &self.nodes[k * nn..(k + 1) * nn],
            edges: &self.edges[k * ne..(k + 1) * ne],
        }
    }

    pub fn embeddings(&self) -> impl Iterator<Item = Embedding<'_>> {
        (0..self.embedding_count()).map(move |k| self.embedding(k))
    }

    /// Set during [`traverse`] when an earlier node (or a known pattern) has
    /// the same indicator vector.
    pub fn is_redundant(&self) -> bool {
        self.redundant
    }
}

#[derive(Default)]
struct ChildBuilder {
    gids: Vec<u32>,
    nodes: Vec<u32>,
    edges: Vec<u32>,
}

impl ChildBuilder {
    fn finish(self, code: DfsCode, n: usize) -> PatternNode {
        let indicator = IndicatorVector::from_indices(n, self.gids.iter().map(|&g| g as usize));
        PatternNode {
            code,
            indicator,
            pattern_index: usize::MAX,
            redundant: false,
            gids: self.gids,
            nodes: self.nodes,
            edges: self.edges,
        }
    }
}

/// One child per distinct single-edge pattern, in tuple order.
pub fn root_children(dataset: &GraphDataset) -> Vec<PatternNode> {
    let mut children: BTreeMap<DfsEdge, ChildBuilder> = BTreeMap::new();
    for (gid, g) in dataset.graphs.iter().enumerate() {
        for (idx, e) in g.edges().iter().enumerate() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                let (la, lb) = (g.node_label(a), g.node_label(b));
                if la > lb {
                    continue;
                }
                let child = children.entry(DfsEdge::new(0, 1, la, e.label, lb)).or_default();
                child.gids.push(gid as u32);
                child.nodes.extend([a, b]);
                child.edges.push(idx as u32);
            }
        }
    }
    children
        .into_iter()
        .map(|(e, b)| b.finish(DfsCode::from_edges_unchecked(vec![e]), dataset.len()))
        .collect()
}

/// Canonical right-most extensions of `node` with support at least one.
pub fn expand(node: &PatternNode, dataset: &GraphDataset) -> Vec<PatternNode> {
    let code = &node.code;
    let path = code.rightmost_path();
    let rightmost = path[0] as usize;
    let min_label = code.edges()[0].from_label;
    let new_index = code.node_count() as u32;

    let mut children: BTreeMap<DfsEdge, ChildBuilder> = BTreeMap::new();
    for emb in node.embeddings() {
        let g = &dataset.graphs[emb.graph];
        let gr = emb.nodes[rightmost];

        for a in g.neighbors(gr) {
            if emb.edges.contains(&a.edge) {
                continue;
            }
            let Some(j) = emb.nodes.iter().position(|&x| x == a.to) else {
                continue;
            };
            if j == rightmost || !path.contains(&(j as u32)) {
                continue;
            }
            let key = DfsEdge::new(rightmost as u32, j as u32, g.node_label(gr), a.label, g.node_label(a.to));
            let child = children.entry(key).or_default();
            child.gids.push(emb.graph as u32);
            child.nodes.extend_from_slice(emb.nodes);
            child.edges.extend_from_slice(emb.edges);
            child.edges.push(a.edge);
        }

        for &i in &path {
            let gi = emb.nodes[i as usize];
            for a in g.neighbors(gi) {
                let to_label = g.node_label(a.to);
                // the root label of a minimum code is the smallest label in the pattern
                if to_label < min_label || emb.nodes.contains(&a.to) {
                    continue;
                }
                let key = DfsEdge::new(i, new_index, g.node_label(gi), a.label, to_label);
                let child = children.entry(key).or_default();
                child.gids.push(emb.graph as u32);
                child.nodes.extend_from_slice(emb.nodes);
                child.nodes.push(a.to);
                child.edges.extend_from_slice(emb.edges);
                child.edges.push(a.edge);
            }
        }
    }

    children
        .into_iter()
        .filter_map(|(e, b)| {
            let child = code.extended(e);
            child.is_canonical().then(|| b.finish(child, dataset.len()))
        })
        .collect()
}

/// What to do below a node after its pre-order action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Continue,
    Prune,
}

/// Pre- and post-order actions of a traversal.
pub trait Visitor {
    fn pre_visit(&mut self, node: &PatternNode) -> Result<Verdict>;

    fn post_visit(&mut self, _node: &PatternNode) -> Result<()> {
        Ok(())
    }
}

/// Adapts a pair of closures into a [`Visitor`].
pub struct FnVisitor<P, Q> {
    pub pre: P,
    pub post: Q,
}

impl<P, Q> Visitor for FnVisitor<P, Q>
where
    P: FnMut(&PatternNode) -> Result<Verdict>,
    Q: FnMut(&PatternNode) -> Result<()>,
{
    fn pre_visit(&mut self, node: &PatternNode) -> Result<Verdict> {
        (self.pre)(node)
    }

    fn post_visit(&mut self, node: &PatternNode) -> Result<()> {
        (self.post)(node)
    }
}

/// Pre-order only.
pub fn pre_order<P>(pre: P) -> FnVisitor<P, fn(&PatternNode) -> Result<()>>
where
    P: FnMut(&PatternNode) -> Result<Verdict>,
{
    FnVisitor { pre, post: |_| Ok(()) }
}

#[derive(Clone, Debug, Default)]
pub struct TraverseOptions {
    /// Patterns with more edges than this are never generated.
    pub max_edges: Option<usize>,
    /// Indicator vectors already owned by a pattern; other patterns with the
    /// same vector are flagged redundant.
    pub known: Vec<(IndicatorVector, DfsCode)>,
}

impl TraverseOptions {
    pub fn limited(max_edges: usize) -> Self {
        TraverseOptions {
            max_edges: Some(max_edges),
            known: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TraversalStats {
    pub visited: usize,
    pub pruned_subtrees: usize,
    pub skipped_redundant: usize,
}

/// Depth-first traversal of the enumeration tree. `Verdict::Prune` skips the
/// subtree below that node; the post-order action fires for every node whose
/// pre-order action fired. A visitor error aborts the walk.
pub fn traverse<V: Visitor + ?Sized>(
    dataset: &GraphDataset,
    visitor: &mut V,
    options: &TraverseOptions,
) -> Result<TraversalStats> {
    let mut walk = Walk {
        dataset,
        max_edges: options.max_edges,
        owners: options
            .known
            .iter()
            .map(|(ind, code)| (ind.clone(), Some(code.clone())))
            .collect(),
        stats: TraversalStats::default(),
    };
    if options.max_edges == Some(0) {
        return Ok(walk.stats);
    }
    for mut child in root_children(dataset) {
        walk.visit(&mut child, visitor)?;
    }
    Ok(walk.stats)
}

struct Walk<'a> {
    dataset: &'a GraphDataset,
    max_edges: Option<usize>,
    owners: HashMap<IndicatorVector, Option<DfsCode>>,
    stats: TraversalStats,
}

impl Walk<'_> {
    fn visit<V: Visitor + ?Sized>(&mut self, node: &mut PatternNode, visitor: &mut V) -> Result<()> {
        node.pattern_index = self.stats.visited;
        self.stats.visited += 1;
        match self.owners.get(&node.indicator) {
            None => {
                self.owners.insert(node.indicator.clone(), None);
            }
            Some(owner) => {
                node.redundant = owner.as_ref() != Some(&node.code);
            }
        }
        if node.redundant {
            self.stats.skipped_redundant += 1;
        }

        match visitor.pre_visit(node)? {
            Verdict::Prune => self.stats.pruned_subtrees += 1,
            Verdict::Continue => {
                if self.max_edges.map_or(true, |m| node.code.len() < m) {
                    for mut child in expand(node, self.dataset) {
                        self.visit(&mut child, visitor)?;
                    }
                }
            }
        }
        visitor.post_visit(node)
    }
}

/// Persistent pattern identities across traversals.
#[derive(Clone, Debug, Default)]
pub struct PatternRegistry {
    ids: HashMap<DfsCode, u32>,
    codes: Vec<DfsCode>,
}

impl PatternRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn id(&self, code: &DfsCode) -> Option<u32> {
        self.ids.get(code).copied()
    }

    pub fn intern(&mut self, code: &DfsCode) -> u32 {
        if let Some(&id) = self.ids.get(code) {
            return id;
        }
        let id = self.codes.len() as u32;
        self.ids.insert(code.clone(), id);
        self.codes.push(code.clone());
        id
    }

    pub fn code(&self, id: u32) -> &DfsCode {
        &self.codes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::graph::{parse_dataset, LabeledGraph};

    fn edge_graph(a: u32, l: u32, b: u32) -> LabeledGraph {
        LabeledGraph::new(vec![a, b], vec![(0, 1, l)], None).unwrap()
    }

    fn collect_all(ds: &GraphDataset) -> Vec<PatternNode> {
        let mut out = Vec::new();
        traverse(
            ds,
            &mut pre_order(|n: &PatternNode| {
                out.push(n.clone());
                Ok(Verdict::Continue)
            }),
            &TraverseOptions::default(),
        )
        .unwrap();
        out
    }

    #[test]
    fn root_children_examples() {
        let ds = GraphDataset::new(vec![edge_graph(2, 1, 3), edge_graph(3, 1, 2)], vec![0.0, 1.0]).unwrap();
        let roots = root_children(&ds);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].indicator.to_string(), "11");

        let ds = GraphDataset::new(vec![edge_graph(1, 1, 1), edge_graph(2, 1, 2)], vec![0.0, 1.0]).unwrap();
        let roots = root_children(&ds);
        let inds: Vec<String> = roots.iter().map(|r| r.indicator.to_string()).collect();
        assert_eq!(inds, vec!["10", "01"]);

        let ds = GraphDataset::new(
            vec![edge_graph(0, 0, 0), edge_graph(1, 1, 1), edge_graph(0, 0, 0), edge_graph(1, 1, 1)],
            vec![0.0; 4],
        )
        .unwrap();
        assert_eq!(root_children(&ds)[0].indicator.to_string(), "1010");
    }

    #[test]
    fn dataset_without_edges_has_no_roots() {
        let ds = parse_dataset("t # 0 1\nv 0 1\n").unwrap();
        assert!(root_children(&ds).is_empty());
        let stats = traverse(&ds, &mut pre_order(|_| Ok(Verdict::Continue)), &TraverseOptions::default()).unwrap();
        assert_eq!(stats.visited, 0);
    }

    #[test]
    fn maximal_pattern_has_no_children() {
        let ds = GraphDataset::new(vec![edge_graph(2, 1, 3)], vec![1.0]).unwrap();
        let root = &root_children(&ds)[0];
        assert!(expand(root, &ds).is_empty());
    }

    #[test]
    fn path_yields_the_two_edge_path() {
        // a-b-c with distinct labels: children of each edge encode the whole path once
        let g = LabeledGraph::new(vec![0, 1, 2], vec![(0, 1, 0), (1, 2, 0)], None).unwrap();
        let ds = GraphDataset::new(vec![g.clone()], vec![1.0]).unwrap();
        let roots = root_children(&ds);
        assert_eq!(roots.len(), 2);
        let children: Vec<PatternNode> = roots.iter().flat_map(|r| expand(r, &ds)).collect();
        assert_eq!(children.len(), 1);
        assert_eq!(children[0].code, crate::dfs::min_dfs_code(&g).unwrap());
        for r in &roots {
            for c in expand(r, &ds) {
                assert!(c.support() <= r.support());
            }
        }
    }

    #[test]
    fn always_prune_visits_roots_only() {
        let ds = parse_dataset("t # 0 1\nv 0 0\nv 1 1\nv 2 0\ne 0 1 0\ne 1 2 1\n").unwrap();
        let stats = traverse(&ds, &mut pre_order(|_| Ok(Verdict::Prune)), &TraverseOptions::default()).unwrap();
        assert_eq!(stats.visited, root_children(&ds).len());
        assert_eq!(stats.pruned_subtrees, stats.visited);
    }

    #[test]
    fn single_edge_dataset_visits_once() {
        let ds = GraphDataset::new(vec![edge_graph(0, 0, 1)], vec![1.0]).unwrap();
        let stats = traverse(&ds, &mut pre_order(|_| Ok(Verdict::Continue)), &TraverseOptions::default()).unwrap();
        assert_eq!(stats.visited, 1);
    }

    #[test]
    fn visitor_error_aborts() {
        let ds = parse_dataset("t # 0 1\nv 0 0\nv 1 1\nv 2 0\ne 0 1 0\ne 1 2 1\n").unwrap();
        let mut count = 0;
        let res = traverse(
            &ds,
            &mut pre_order(|_| {
                count += 1;
                Err(Error::Internal("stop".into()))
            }),
            &TraverseOptions::default(),
        );
        assert!(res.is_err());
        assert_eq!(count, 1);
    }

    #[test]
    fn visit_order_equals_code_order() {
        let ds = parse_dataset(
            "t # 0 1\nv 0 0\nv 1 1\nv 2 0\nv 3 1\ne 0 1 0\ne 1 2 1\ne 2 3 0\ne 3 0 0\ne 0 2 1\n\
             t # 1 0\nv 0 0\nv 1 0\nv 2 1\ne 0 1 0\ne 1 2 0\ne 2 0 1\n",
        )
        .unwrap();
        let nodes = collect_all(&ds);
        let codes: Vec<DfsCode> = nodes.iter().map(|n| n.code.clone()).collect();
        let mut sorted = codes.clone();
        sorted.sort();
        assert_eq!(codes, sorted);
        for (i, n) in nodes.iter().enumerate() {
            assert_eq!(n.pattern_index, i);
            assert!(n.code.is_canonical());
        }
    }

    #[test]
    fn embeddings_are_consistent_with_indicator() {
        let ds = parse_dataset(
            "t # 0 1\nv 0 0\nv 1 1\nv 2 0\ne 0 1 0\ne 1 2 1\ne 2 0 0\nt # 1 0\nv 0 0\nv 1 1\ne 0 1 0\n",
        )
        .unwrap();
        for node in collect_all(&ds) {
            let mut with: Vec<usize> = node.embeddings().map(|e| e.graph).collect();
            with.dedup();
            assert_eq!(with, node.indicator.iter_ones().collect::<Vec<_>>());
            for emb in node.embeddings() {
                let g = &ds.graphs[emb.graph];
                for (k, e) in node.code.edges().iter().enumerate() {
                    let ge = g.edges()[emb.edges[k] as usize];
                    let (a, b) = (emb.nodes[e.from as usize], emb.nodes[e.to as usize]);
                    assert!((ge.u == a && ge.v == b) || (ge.u == b && ge.v == a));
                    assert_eq!(ge.label, e.edge_label);
                }
            }
        }
    }

    #[test]
    fn registry_interns_once() {
        let mut reg = PatternRegistry::new();
        let c: DfsCode = "0,1,0,0,1".parse().unwrap();
        let id = reg.intern(&c);
        assert_eq!(reg.intern(&c), id);
        assert_eq!(reg.id(&c), Some(id));
        assert_eq!(reg.code(id), &c);
        assert_eq!(reg.len(), 1);
    }
}
