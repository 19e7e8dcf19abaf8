//! Brute-force counterparts of the tree machinery, used to check it: the
//! explicit level-limited design matrix, the dense reference optimizer, and
//! exhaustive evaluation of subtrees.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::bcgd::engine::{Candidate, Engine};
use crate::bcgd::{FitConfig, FitResult, Snapshot, TraceRow};
use crate::bounds::{mk_bounds, BoundPair, SeparableObjective};
use crate::dfs::{min_dfs_code, DfsCode};
use crate::enumtree::{expand, pre_order, traverse, PatternNode, TraverseOptions, Verdict};
use crate::error::{Error, Result};
use crate::graph::{GraphDataset, LabeledGraph};
use crate::indicator::IndicatorVector;
use crate::loss::Loss;

/// All patterns with at most `max_edges` edges as explicit 0/1 columns.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    /// In DFS visit order.
    pub columns: Vec<(DfsCode, IndicatorVector)>,
    pub max_edges: usize,
    pub n: usize,
}

pub const DEFAULT_ORACLE_MAX_EDGES: usize = 4;

pub fn build_design_matrix(dataset: &GraphDataset, max_edges: usize) -> Result<DesignMatrix> {
    let mut columns = Vec::new();
    traverse(
        dataset,
        &mut pre_order(|node: &PatternNode| {
            columns.push((node.code.clone(), node.indicator.clone()));
            Ok(Verdict::Continue)
        }),
        &TraverseOptions::limited(max_edges),
    )?;
    Ok(DesignMatrix {
        columns,
        max_edges,
        n: dataset.len(),
    })
}

impl DesignMatrix {
    /// Columns after dropping every column whose indicator already appeared.
    pub fn distinct_columns(&self) -> Vec<&(DfsCode, IndicatorVector)> {
        let mut seen = HashSet::new();
        self.columns.iter().filter(|(_, ind)| seen.insert(ind)).collect()
    }

    /// Dense text: `# code <index> <tuples>` lines, then one row per graph of
    /// 0/1 entries followed by the label.
    pub fn export(&self, labels: &[f64]) -> Result<String> {
        if labels.len() != self.n {
            return Err(Error::Domain(format!("{} labels for {} rows", labels.len(), self.n)));
        }
        let mut out = format!("# max_edges {}\n", self.max_edges);
        for (k, (code, _)) in self.columns.iter().enumerate() {
            let _ = writeln!(out, "# code {k} {code}");
        }
        for (i, y) in labels.iter().enumerate() {
            for (_, ind) in &self.columns {
                out.push_str(if ind.get(i) { "1 " } else { "0 " });
            }
            let _ = writeln!(out, "{y}");
        }
        Ok(out)
    }

    pub fn import(text: &str) -> Result<(DesignMatrix, Vec<f64>)> {
        let mut max_edges = None;
        let mut codes = Vec::new();
        let mut rows: Vec<Vec<bool>> = Vec::new();
        let mut labels = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let ln = k + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(m) = rest.strip_prefix("max_edges ") {
                    max_edges = Some(m.trim().parse().map_err(|_| Error::parse(ln, "bad max_edges"))?);
                } else if let Some(c) = rest.strip_prefix("code ") {
                    let (idx, tuples) = c.trim().split_once(' ').unwrap_or((c.trim(), ""));
                    let idx: usize = idx.parse().map_err(|_| Error::parse(ln, "bad column index"))?;
                    if idx != codes.len() {
                        return Err(Error::parse(ln, format!("column {idx} out of order")));
                    }
                    codes.push(tuples.parse::<DfsCode>().map_err(|e| Error::parse(ln, e.to_string()))?);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != codes.len() + 1 {
                return Err(Error::parse(ln, format!("expected {} fields, found {}", codes.len() + 1, fields.len())));
            }
            let mut row = Vec::with_capacity(codes.len());
            for f in &fields[..codes.len()] {
                row.push(match *f {
                    "0" => false,
                    "1" => true,
                    _ => return Err(Error::parse(ln, format!("matrix entry {f:?} is not 0 or 1"))),
                });
            }
            labels.push(fields[codes.len()].parse::<f64>().map_err(|_| Error::parse(ln, "bad label"))?);
            rows.push(row);
        }
        let n = rows.len();
        let columns = codes
            .into_iter()
            .enumerate()
            .map(|(j, code)| (code, IndicatorVector::from_indices(n, (0..n).filter(|&i| rows[i][j]))))
            .collect();
        let max_edges = max_edges.ok_or_else(|| Error::parse(1, "missing max_edges header"))?;
        Ok((DesignMatrix { columns, max_edges, n }, labels))
    }
}

/// The optimizer on explicit columns: every distinct column is evaluated at
/// every iteration, with no tree, pruning or dictionaries. Duplicate columns
/// keep the first occurrence.
pub fn reference_fit(matrix: &DesignMatrix, labels: &[f64], loss: &dyn Loss, config: &FitConfig) -> Result<FitResult> {
    if labels.len() != matrix.n {
        return Err(Error::Domain(format!("{} labels for {} rows", labels.len(), matrix.n)));
    }
    if matrix.n == 0 {
        return Err(Error::NoGraphs);
    }
    let columns = matrix.distinct_columns();
    let skipped = matrix.columns.len() - columns.len();
    let mut engine = Engine::new(loss, labels, config)?;
    let initial_objective = engine.objective;
    let mut trace = Vec::new();
    let mut converged = false;
    while engine.iter() < config.max_iter {
        engine.refresh();
        let mut candidates = Vec::new();
        for (code, ind) in &columns {
            let target = engine.target(ind, engine.theta_of(code))?;
            if target != 0.0 {
                candidates.push(Candidate {
                    code: code.clone(),
                    indicator: ind.clone(),
                    target,
                });
            }
        }
        let iter = engine.iter();
        let report = engine.step(candidates)?;
        trace.push(TraceRow {
            iter,
            objective: engine.objective,
            train_error: engine.train_error(),
            n_features: engine.active.len(),
            visited: matrix.columns.len(),
            pruned: 0,
            skipped,
            alpha: report.alpha,
            hd_inf: report.hd_inf,
            test_error: None,
            snapshot: config.record_coefficients.then(|| engine.snapshot(report.t_nonzero.clone())),
        });
        if report.converged {
            converged = true;
            break;
        }
    }
    Ok(FitResult {
        model: crate::bcgd::engine_model(&engine, config, loss, matrix.n),
        trace,
        initial_objective,
        converged,
        train_mu: engine.mu.clone(),
    })
}

/// First disagreement between two traces with snapshots, if any. Nonzero sets
/// must match exactly; values within `tol`.
pub fn compare_traces(a: &[TraceRow], b: &[TraceRow], tol: f64) -> std::result::Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("{} iterations vs {}", a.len(), b.len()));
    }
    for (ra, rb) in a.iter().zip(b) {
        let t = ra.iter;
        let (Some(sa), Some(sb)) = (&ra.snapshot, &rb.snapshot) else {
            return Err(format!("iteration {t}: trace lacks coefficient snapshots"));
        };
        compare_snapshots(sa, sb, tol).map_err(|e| format!("iteration {t}: {e}"))?;
        if (ra.objective - rb.objective).abs() > tol * ra.objective.abs().max(1.0) {
            return Err(format!("iteration {t}: objective {} vs {}", ra.objective, rb.objective));
        }
    }
    Ok(())
}

fn compare_snapshots(a: &Snapshot, b: &Snapshot, tol: f64) -> std::result::Result<(), String> {
    if a.t_nonzero != b.t_nonzero {
        return Err("nonzero update sets differ".into());
    }
    let ca: Vec<&DfsCode> = a.coefficients.iter().map(|(c, _)| c).collect();
    let cb: Vec<&DfsCode> = b.coefficients.iter().map(|(c, _)| c).collect();
    if ca != cb {
        return Err("nonzero coefficient sets differ".into());
    }
    if (a.intercept - b.intercept).abs() > tol {
        return Err(format!("intercept {} vs {}", a.intercept, b.intercept));
    }
    for ((code, va), (_, vb)) in a.coefficients.iter().zip(&b.coefficients) {
        if (va - vb).abs() > tol {
            return Err(format!("coefficient of {code}: {va} vs {vb}"));
        }
    }
    Ok(())
}

/// Every strict descendant of `node` within `max_edges`, in DFS order.
pub fn subtree_nodes(dataset: &GraphDataset, node: &PatternNode, max_edges: Option<usize>) -> Vec<PatternNode> {
    fn rec(ds: &GraphDataset, node: &PatternNode, max_edges: Option<usize>, out: &mut Vec<PatternNode>) {
        if max_edges.is_some_and(|m| node.code.len() >= m) {
            return;
        }
        for child in expand(node, ds) {
            rec(ds, &child, max_edges, out);
            out.push(child);
        }
    }
    let mut out = Vec::new();
    rec(dataset, node, max_edges, &mut out);
    out
}

/// True iff `obj` at `node` and at every descendant lies within the bounds
/// computed from `node` alone.
pub fn exhaustive_subtree_check(
    dataset: &GraphDataset,
    node: &PatternNode,
    obj: &SeparableObjective,
    max_edges: Option<usize>,
) -> Result<bool> {
    let b = mk_bounds(obj, &node.indicator)?;
    if !b.contains(obj.evaluate(&node.indicator)?) {
        return Ok(false);
    }
    for k in subtree_nodes(dataset, node, max_edges) {
        if !b.contains(obj.evaluate(&k.indicator)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact range of an arbitrary `f` over every `v` with `1(v) ⊆ 1(u)`, by
/// enumeration. Exponential in the support of `u`.
pub fn general_bounds(f: impl Fn(&IndicatorVector) -> f64, u: &IndicatorVector) -> Result<BoundPair> {
    let free: Vec<usize> = u.iter_ones().collect();
    if free.len() > 24 {
        return Err(Error::Domain(format!("support {} too large to enumerate", free.len())));
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for mask in 0u32..(1 << free.len()) {
        let v = IndicatorVector::from_indices(
            u.len(),
            free.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i),
        );
        let x = f(&v);
        lower = lower.min(x);
        upper = upper.max(x);
    }
    Ok(BoundPair::new(lower, upper))
}

/// Canonical codes of every connected subgraph with 1..=max_edges edges, by
/// enumerating edge subsets of each graph. Independent of the tree code.
pub fn brute_force_patterns(dataset: &GraphDataset, max_edges: usize) -> Result<BTreeSet<DfsCode>> {
    const MAX_SUBSETS: f64 = 1e7;
    let mut out = BTreeSet::new();
    for g in &dataset.graphs {
        let m = g.edge_count();
        let k_max = max_edges.min(m);
        let mut count = 0.0;
        let mut binom = 1.0;
        for k in 1..=k_max {
            binom *= (m - k + 1) as f64 / k as f64;
            count += binom;
        }
        if count > MAX_SUBSETS {
            return Err(Error::Domain(format!(
                "graph with {m} edges has too many subsets of up to {max_edges} edges to enumerate"
            )));
        }
        let mut chosen = Vec::with_capacity(k_max);
        subsets(m, k_max, 0, &mut chosen, &mut |edges| {
            if let Some(sub) = edge_subgraph(g, edges) {
                out.insert(min_dfs_code(&sub)?);
            }
            Ok(())
        })?;
    }
    Ok(out)
}

/// Calls `f` on every nonempty subset of `0..m` with at most `k` elements.
fn subsets(
    m: usize,
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    for e in start..m {
        chosen.push(e);
        f(chosen)?;
        if chosen.len() < k {
            subsets(m, k, e + 1, chosen, f)?;
        }
        chosen.pop();
    }
    Ok(())
}

fn edge_subgraph(g: &LabeledGraph, chosen: &[usize]) -> Option<LabeledGraph> {
    let mut map = vec![u32::MAX; g.node_count()];
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for &k in chosen {
        let e = &g.edges()[k];
        for v in [e.u, e.v] {
            if map[v as usize] == u32::MAX {
                map[v as usize] = labels.len() as u32;
                labels.push(g.node_label(v));
            }
        }
        edges.push((map[e.u as usize], map[e.v as usize], e.label));
    }
    let sub = LabeledGraph::new(labels, edges, None).ok()?;
    sub.is_connected().then_some(sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_dataset;
    use crate::loss::Logistic;

    fn small() -> GraphDataset {
        parse_dataset(
            "t # 0 1\nv 0 0\nv 1 1\nv 2 0\nv 3 1\ne 0 1 0\ne 1 2 1\ne 2 3 0\ne 3 0 0\n\
             t # 1 0\nv 0 0\nv 1 0\nv 2 1\ne 0 1 0\ne 1 2 0\ne 2 0 1\n\
             t # 2 1\nv 0 1\nv 1 0\nv 2 0\nv 3 1\ne 0 1 0\ne 1 2 0\ne 2 3 1\n",
        )
        .unwrap()
    }

    #[test]
    fn single_shared_edge() {
        let ds = parse_dataset("t # 0 1\nv 0 0\nv 1 1\ne 0 1 0\nt # 1 0\nv 0 1\nv 1 0\ne 0 1 0\n").unwrap();
        let m = build_design_matrix(&ds, 1).unwrap();
        assert_eq!(m.columns.len(), 1);
        assert_eq!(m.columns[0].1.to_string(), "11");
        assert!(build_design_matrix(&ds, 0).unwrap().columns.is_empty());
    }

    #[test]
    fn column_count_matches_brute_force() {
        let ds = small();
        for k in 1..=4 {
            let m = build_design_matrix(&ds, k).unwrap();
            let codes: BTreeSet<DfsCode> = m.columns.iter().map(|(c, _)| c.clone()).collect();
            assert_eq!(codes.len(), m.columns.len());
            assert_eq!(codes, brute_force_patterns(&ds, k).unwrap());
        }
    }

    #[test]
    fn export_round_trips() {
        let ds = small();
        let m = build_design_matrix(&ds, 3).unwrap();
        let text = m.export(&ds.labels).unwrap();
        let (back, labels) = DesignMatrix::import(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(labels, ds.labels);
        assert!(DesignMatrix::import("# max_edges 1\n# code 0 0,1,0,0,1\n2 1\n").is_err());
    }

    #[test]
    fn reference_matches_tree_fit_on_small_data() {
        let ds = small();
        let cfg = FitConfig {
            lambda1: 0.05,
            max_edges: Some(4),
            record_coefficients: true,
            ..FitConfig::default()
        };
        let m = build_design_matrix(&ds, 4).unwrap();
        let dense = reference_fit(&m, &ds.labels, &Logistic, &cfg).unwrap();
        let tree = crate::bcgd::fit(&ds, &Logistic, &cfg).unwrap();
        compare_traces(&tree.trace, &dense.trace, 1e-8).unwrap();
    }

    #[test]
    fn huge_l1_reference_is_intercept_only() {
        let ds = small();
        let cfg = FitConfig {
            lambda1: 1e3,
            ..FitConfig::default()
        };
        let m = build_design_matrix(&ds, 3).unwrap();
        let res = reference_fit(&m, &ds.labels, &Logistic, &cfg).unwrap();
        assert!(res.model.features.is_empty());
    }

    #[test]
    fn subtree_check_cases() {
        let ds = small();
        let roots = crate::enumtree::root_children(&ds);
        let obj = SeparableObjective::new(vec![1.0; 3], vec![1.0; 3]).unwrap();
        for r in &roots {
            assert!(exhaustive_subtree_check(&ds, r, &obj, None).unwrap());
        }
        let leaf_ds = parse_dataset("t # 0 1\nv 0 0\nv 1 1\ne 0 1 0\n").unwrap();
        let leaf = &crate::enumtree::root_children(&leaf_ds)[0];
        assert!(subtree_nodes(&leaf_ds, leaf, None).is_empty());
        let obj = SeparableObjective::new(vec![0.0], vec![-1.0]).unwrap();
        assert!(exhaustive_subtree_check(&leaf_ds, leaf, &obj, None).unwrap());
    }

    #[test]
    fn general_bounds_agree_with_separable_ones() {
        let obj = SeparableObjective::new(vec![1.0, -2.0, 0.5, 0.0], vec![-1.0, 3.0, 0.5, 2.0]).unwrap();
        let u = IndicatorVector::from_bools(&[true, true, false, true]);
        let g = general_bounds(|v| obj.evaluate(v).unwrap(), &u).unwrap();
        assert_eq!(g, mk_bounds(&obj, &u).unwrap());
        // a non-separable objective: |sum| over the free coordinates
        let g = general_bounds(|v| (v.support() as f64 - 1.5).abs(), &u).unwrap();
        assert_eq!(g, BoundPair::new(0.5, 1.5));
    }
}
