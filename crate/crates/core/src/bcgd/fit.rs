//! The tree-based driver: one pruned traversal per iteration finds the
//! patterns with nonzero `T_j`.

use std::collections::{BTreeSet, HashMap};

use super::engine::{Candidate, Engine};
use super::model::{Feature, SparseModel};
use super::step::{loss_gradient_bounds, prune_test};
use super::trace::{FitResult, TraceRow};
use super::FitConfig;
use crate::dictpass::{b_bounds, merge_h, NodeDictionary, PassingState, PatternId};
use crate::enumtree::{traverse, PatternNode, PatternRegistry, TraversalStats, TraverseOptions, Verdict, Visitor};
use crate::error::{Error, Result};
use crate::graph::GraphDataset;
use crate::loss::Loss;

/// Fits the model on `dataset`.
pub fn fit(dataset: &GraphDataset, loss: &dyn Loss, config: &FitConfig) -> Result<FitResult> {
    fit_observed(dataset, loss, config, &mut |_| None)
}

/// Like [`fit`], calling `observer` with the model after every iteration; a
/// returned value is stored as that row's test error.
pub fn fit_observed(
    dataset: &GraphDataset,
    loss: &dyn Loss,
    config: &FitConfig,
    observer: &mut dyn FnMut(&SparseModel) -> Option<f64>,
) -> Result<FitResult> {
    if dataset.is_empty() {
        return Err(Error::NoGraphs);
    }
    let mut engine = Engine::new(loss, &dataset.labels, config)?;
    let initial_objective = engine.objective;
    let mut registry = PatternRegistry::new();
    let mut h = NodeDictionary::new();
    let mut trace = Vec::new();
    let mut converged = false;

    while engine.iter() < config.max_iter {
        engine.refresh();
        let mut theta = HashMap::new();
        let mut hes = HashMap::new();
        for (code, a) in &engine.active {
            let id = registry.intern(code);
            theta.insert(id, a.theta);
            hes.insert(id, engine.hessian(&a.indicator));
        }

        let mut search = TreeSearch {
            engine: &engine,
            config,
            registry: &mut registry,
            state: PassingState::new(h),
            theta,
            hes,
            candidates: Vec::new(),
        };
        let options = TraverseOptions {
            max_edges: config.max_edges,
            known: engine.active.iter().map(|(c, a)| (a.indicator.clone(), c.clone())).collect(),
        };
        let stats: TraversalStats = traverse(dataset, &mut search, &options)?;
        let TreeSearch {
            mut state, candidates, ..
        } = search;
        let h_current = std::mem::take(&mut state.h);
        let h_prime = state.finish()?;

        let iter = engine.iter();
        let report = engine.step(candidates)?;

        let nonzero: BTreeSet<PatternId> = engine.active.keys().map(|c| registry.intern(c)).collect();
        h = merge_h(&h_current, &h_prime, &nonzero);

        let model = build_model(&engine, config, loss, dataset.len());
        let test_error = observer(&model);
        trace.push(TraceRow {
            iter,
            objective: engine.objective,
            train_error: engine.train_error(),
            n_features: engine.active.len(),
            visited: stats.visited,
            pruned: stats.pruned_subtrees,
            skipped: stats.skipped_redundant,
            alpha: report.alpha,
            hd_inf: report.hd_inf,
            test_error,
            snapshot: config.record_coefficients.then(|| engine.snapshot(report.t_nonzero.clone())),
        });
        if report.converged {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        model: build_model(&engine, config, loss, dataset.len()),
        trace,
        initial_objective,
        converged,
        train_mu: engine.mu.clone(),
    })
}

pub(crate) fn build_model(engine: &Engine<'_>, config: &FitConfig, loss: &dyn Loss, n: usize) -> SparseModel {
    SparseModel {
        intercept: engine.intercept,
        features: engine
            .active
            .iter()
            .map(|(code, a)| Feature {
                code: code.clone(),
                coef: a.theta,
                support: a.indicator.support(),
            })
            .collect(),
        lambda1: config.lambda1,
        lambda2: config.lambda2,
        loss: loss.name().to_string(),
        n,
    }
}

struct TreeSearch<'e, 'a> {
    engine: &'e Engine<'a>,
    config: &'e FitConfig,
    registry: &'e mut PatternRegistry,
    state: PassingState,
    theta: HashMap<PatternId, f64>,
    hes: HashMap<PatternId, f64>,
    candidates: Vec<Candidate>,
}

impl Visitor for TreeSearch<'_, '_> {
    fn pre_visit(&mut self, node: &PatternNode) -> Result<Verdict> {
        let id = self.registry.intern(&node.code);
        let target = if node.is_redundant() {
            0.0
        } else {
            self.engine.target(&node.indicator, self.engine.theta_of(&node.code))?
        };
        if target != 0.0 {
            self.candidates.push(Candidate {
                code: node.code.clone(),
                indicator: node.indicator.clone(),
                target,
            });
        }
        self.state.on_pre_visit(id, target != 0.0)?;
        if !self.config.prune {
            return Ok(Verdict::Continue);
        }
        let b = b_bounds(&self.state.h, id, &self.theta, &self.hes, self.config.lambda2)?;
        let l = loss_gradient_bounds(&node.indicator, &self.engine.d1);
        Ok(if prune_test(l, b, self.config.lambda1) {
            Verdict::Prune
        } else {
            Verdict::Continue
        })
    }

    fn post_visit(&mut self, node: &PatternNode) -> Result<()> {
        let id = self
            .registry
            .id(&node.code)
            .ok_or_else(|| Error::Internal("post-visit of an unregistered pattern".into()))?;
        self.state.on_post_visit(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contains::contains;
    use crate::graph::parse_dataset;
    use crate::loss::{Logistic, Squared};

    fn toy() -> GraphDataset {
        // positives carry 0-[0]-1, negatives do not
        parse_dataset(
            "t # 0 1\nv 0 0\nv 1 1\nv 2 2\ne 0 1 0\ne 1 2 0\n\
             t # 1 1\nv 0 0\nv 1 1\ne 0 1 0\n\
             t # 2 1\nv 0 2\nv 1 0\nv 2 1\ne 0 1 1\ne 1 2 0\n\
             t # 3 0\nv 0 0\nv 1 2\nv 2 1\ne 0 1 0\ne 1 2 0\n\
             t # 4 0\nv 0 2\nv 1 1\ne 0 1 0\n\
             t # 5 0\nv 0 0\nv 1 2\ne 0 1 1\n",
        )
        .unwrap()
    }

    #[test]
    fn huge_l1_gives_intercept_only() {
        let ds = toy();
        let cfg = FitConfig {
            lambda1: 1e6,
            ..FitConfig::default()
        };
        let res = fit(&ds, &Logistic, &cfg).unwrap();
        assert!(res.model.features.is_empty());
        assert!(res.converged);
        // balanced labels: the intercept stays at log(p / (1 - p)) = 0
        assert!(res.model.intercept.abs() < 1e-12);
    }

    #[test]
    fn intercept_tracks_log_odds() {
        let mut ds = toy();
        ds.labels = vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let cfg = FitConfig {
            lambda1: 1e6,
            eps: 1e-10,
            ..FitConfig::default()
        };
        let res = fit(&ds, &Logistic, &cfg).unwrap();
        assert!((res.model.intercept - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn perfect_separator_is_found() {
        let ds = toy();
        let cfg = FitConfig {
            lambda1: 0.05,
            max_iter: 2000,
            ..FitConfig::default()
        };
        let res = fit(&ds, &Logistic, &cfg).unwrap();
        assert!(res.converged);
        assert_eq!(res.trace.last().unwrap().train_error, 0.0);
        assert!(res.model.features.iter().any(|f| f.code.to_string() == "0,1,0,0,1" && f.coef > 0.0));
    }

    #[test]
    fn descent_is_monotone_and_mu_is_consistent() {
        let ds = toy();
        for (loss, l2) in [(&Logistic as &dyn Loss, 0.0), (&Squared as &dyn Loss, 0.1)] {
            let cfg = FitConfig {
                lambda1: 0.1,
                lambda2: l2,
                ..FitConfig::default()
            };
            let res = fit(&ds, loss, &cfg).unwrap();
            let mut prev = res.initial_objective;
            for row in &res.trace {
                assert!(row.objective < prev || row.alpha == 0.0, "{} at {}", loss.name(), row.iter);
                prev = row.objective;
            }
            for (g, &mu) in ds.graphs.iter().zip(&res.train_mu) {
                assert!((super::super::predict(&res.model, g) - mu).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn active_features_have_distinct_indicators() {
        let ds = toy();
        let res = fit(&ds, &Squared, &FitConfig { lambda1: 0.01, ..FitConfig::default() }).unwrap();
        let columns: Vec<Vec<bool>> = res
            .model
            .features
            .iter()
            .map(|f| ds.graphs.iter().map(|g| contains(g, &f.code)).collect())
            .collect();
        for (i, a) in columns.iter().enumerate() {
            for b in &columns[i + 1..] {
                assert_ne!(a, b);
            }
        }
        assert!(res.trace.iter().any(|r| r.skipped > 0));
    }

    #[test]
    fn rejects_bad_labels() {
        let mut ds = toy();
        ds.labels[0] = 2.0;
        assert!(matches!(fit(&ds, &Logistic, &FitConfig::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn observer_sees_every_iteration() {
        let ds = toy();
        let mut calls = 0;
        let res = fit_observed(&ds, &Logistic, &FitConfig::default(), &mut |_| {
            calls += 1;
            Some(0.5)
        })
        .unwrap();
        assert_eq!(calls, res.trace.len());
        assert!(res.trace.iter().all(|r| r.test_error == Some(0.5)));
    }
}
