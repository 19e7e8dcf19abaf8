//! Bounds for separable objectives over indicator vectors, and the
//! single-best-feature searches built on them.
//!
//! For an objective `f(v) = sum_i f_i(v_i)` over `v in {0,1}^n`, every
//! descendant `v` of a node `u` in the enumeration tree satisfies
//! `1(v) ⊆ 1(u)`. The coordinates in `0(u)` are therefore fixed at zero and
//! only those in `1(u)` are free, which gives
//!
//! ```text
//! lower = sum_{i in 1(u)} min(f_i(0), f_i(1)) + sum_{i in 0(u)} f_i(0)
//! upper = sum_{i in 1(u)} max(f_i(0), f_i(1)) + sum_{i in 0(u)} f_i(0)
//! ```

use crate::dfs::DfsCode;
use crate::enumtree::{pre_order, traverse, PatternNode, TraverseOptions, Verdict};
use crate::error::{Error, Result};
use crate::graph::GraphDataset;
use crate::indicator::IndicatorVector;

/// Per-sample values `f_i(0)` and `f_i(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableObjective {
    f0: Vec<f64>,
    f1: Vec<f64>,
}

impl SeparableObjective {
    pub fn new(f0: Vec<f64>, f1: Vec<f64>) -> Result<Self> {
        if f0.len() != f1.len() {
            return Err(Error::Domain(format!(
                "f(0) has {} entries but f(1) has {}",
                f0.len(),
                f1.len()
            )));
        }
        if f0.iter().chain(&f1).any(|x| !x.is_finite()) {
            return Err(Error::Domain("objective values must be finite".into()));
        }
        Ok(SeparableObjective { f0, f1 })
    }

    /// Objective from a per-sample closure `f(i, bit)`.
    pub fn from_fn(n: usize, f: impl Fn(usize, bool) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| f(i, false)).collect(), (0..n).map(|i| f(i, true)).collect())
    }

    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    pub fn f0(&self) -> &[f64] {
        &self.f0
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    pub fn evaluate(&self, v: &IndicatorVector) -> Result<f64> {
        self.check_len(v)?;
        Ok((0..self.len())
            .map(|i| if v.get(i) { self.f1[i] } else { self.f0[i] })
            .sum())
    }

    fn check_len(&self, v: &IndicatorVector) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::Domain(format!(
                "indicator has length {} but objective has {}",
                v.len(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// A closed interval `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

impl BoundPair {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper, "lower {lower} above upper {upper}");
        BoundPair { lower, upper }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Bounds of `obj(v)` over every `v` with `1(v) ⊆ 1(u)`.
pub fn mk_bounds(obj: &SeparableObjective, u: &IndicatorVector) -> Result<BoundPair> {
    obj.check_len(u)?;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for i in 0..obj.len() {
        if u.get(i) {
            lower += obj.f0[i].min(obj.f1[i]);
            upper += obj.f0[i].max(obj.f1[i]);
        } else {
            lower += obj.f0[i];
            upper += obj.f0[i];
        }
    }
    Ok(BoundPair::new(lower, upper))
}

/// The vectors attaining the bounds of [`mk_bounds`]: `(argmin, argmax)`.
pub fn mk_bound_witnesses(obj: &SeparableObjective, u: &IndicatorVector) -> Result<(IndicatorVector, IndicatorVector)> {
    obj.check_len(u)?;
    let lo = u.iter_ones().filter(|&i| obj.f1[i] < obj.f0[i]);
    let hi = u.iter_ones().filter(|&i| obj.f1[i] > obj.f0[i]);
    Ok((
        IndicatorVector::from_indices(u.len(), lo),
        IndicatorVector::from_indices(u.len(), hi),
    ))
}

/// Options shared by the single-feature searches.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_edges: Option<usize>,
    /// Disable to get the exhaustive search used as a reference.
    pub prune: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_edges: None,
            prune: true,
        }
    }
}

/// Result of a single-feature search.
#[derive(Clone, Debug, PartialEq)]
pub struct BestFeature {
    pub code: DfsCode,
    pub value: f64,
    pub visited: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Maximize,
    Minimize,
}

/// Generic branch and bound: `value` scores a node, `bound` gives the best
/// value any node in its subtree can reach. Keeps the first optimum found.
fn branch_and_bound(
    dataset: &GraphDataset,
    sense: Sense,
    options: &SearchOptions,
    value: impl Fn(&IndicatorVector) -> f64,
    bound: impl Fn(&IndicatorVector) -> f64,
) -> Result<BestFeature> {
    let mut best: Option<(DfsCode, f64)> = None;
    let better = |a: f64, b: f64| match sense {
        Sense::Maximize => a > b,
        Sense::Minimize => a < b,
    };
    let stats = traverse(
        dataset,
        &mut pre_order(|node: &PatternNode| {
            let v = value(&node.indicator);
            if best.as_ref().map_or(true, |(_, b)| better(v, *b)) {
                best = Some((node.code.clone(), v));
            }
            if options.prune {
                let (_, incumbent) = best.as_ref().expect("set above");
                if !better(bound(&node.indicator), *incumbent) {
                    return Ok(Verdict::Prune);
                }
            }
            Ok(Verdict::Continue)
        }),
        &TraverseOptions {
            max_edges: options.max_edges,
            known: Vec::new(),
        },
    )?;
    let (code, value) = best.ok_or_else(|| Error::Domain("dataset has no subgraph patterns".into()))?;
    Ok(BestFeature {
        code,
        value,
        visited: stats.visited,
    })
}

fn check_weights(dataset: &GraphDataset, w: &[f64], y: Option<&[f64]>) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::Domain("empty dataset".into()));
    }
    if w.len() != dataset.len() || y.is_some_and(|y| y.len() != dataset.len()) {
        return Err(Error::Domain("weight/label length differs from the dataset size".into()));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("weights must be finite".into()));
    }
    Ok(())
}

/// Gain objective `f_i(v) = w_i y_i (2v - 1)` with `y_i ∈ {-1, +1}`.
pub fn gain_objective(w: &[f64], y: &[f64]) -> Result<SeparableObjective> {
    SeparableObjective::from_fn(w.len(), |i, bit| w[i] * y[i] * if bit { 1.0 } else { -1.0 })
}

/// Weighted error objective `f_i(v) = w_i [v != y_i]` with `y_i ∈ {0, 1}`.
pub fn error_objective(w: &[f64], y: &[f64]) -> Result<SeparableObjective> {
    SeparableObjective::from_fn(w.len(), |i, bit| if (bit as u8 as f64) != y[i] { w[i] } else { 0.0 })
}

/// Maximises `sum_i w_i y_i (2 I(x in g_i) - 1)` for `w_i >= 0`, `y_i = ±1`.
pub fn best_gain_feature(dataset: &GraphDataset, w: &[f64], y: &[f64]) -> Result<BestFeature> {
    best_gain_feature_with(dataset, w, y, &SearchOptions::default())
}

pub fn best_gain_feature_with(
    dataset: &GraphDataset,
    w: &[f64],
    y: &[f64],
    options: &SearchOptions,
) -> Result<BestFeature> {
    check_weights(dataset, w, Some(y))?;
    if w.iter().any(|&x| x < 0.0) {
        return Err(Error::Domain("gain weights must be non-negative".into()));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Domain("gain labels must be -1 or +1".into()));
    }
    let obj = gain_objective(w, y)?;
    branch_and_bound(
        dataset,
        Sense::Maximize,
        options,
        |u| obj.evaluate(u).expect("lengths checked"),
        |u| mk_bounds(&obj, u).expect("lengths checked").upper,
    )
}

/// Minimises `sum_i w_i I(I(x in g_i) != y_i)` for `y_i ∈ {0, 1}`.
pub fn best_error_feature(dataset: &GraphDataset, w: &[f64], y: &[f64]) -> Result<BestFeature> {
    best_error_feature_with(dataset, w, y, &SearchOptions::default())
}

pub fn best_error_feature_with(
    dataset: &GraphDataset,
    w: &[f64],
    y: &[f64],
    options: &SearchOptions,
) -> Result<BestFeature> {
    check_weights(dataset, w, Some(y))?;
    if w.iter().any(|&x| x < 0.0) {
        return Err(Error::Domain("error weights must be non-negative".into()));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Domain("error labels must be 0 or 1".into()));
    }
    let obj = error_objective(w, y)?;
    branch_and_bound(
        dataset,
        Sense::Minimize,
        options,
        |u| obj.evaluate(u).expect("lengths checked"),
        |u| mk_bounds(&obj, u).expect("lengths checked").lower,
    )
}

/// Maximises `|sum_i w_i I(x in g_i)|`.
pub fn best_correlation_feature(dataset: &GraphDataset, w: &[f64]) -> Result<BestFeature> {
    best_correlation_feature_with(dataset, w, &SearchOptions::default())
}

pub fn best_correlation_feature_with(dataset: &GraphDataset, w: &[f64], options: &SearchOptions) -> Result<BestFeature> {
    check_weights(dataset, w, None)?;
    // separable in the signed sum; |.| is bounded by the larger side
    let obj = SeparableObjective::new(vec![0.0; w.len()], w.to_vec())?;
    branch_and_bound(
        dataset,
        Sense::Maximize,
        options,
        |u| u.sum_over(w).abs(),
        |u| {
            let b = mk_bounds(&obj, u).expect("lengths checked");
            b.upper.max(-b.lower)
        },
    )
}
