//! Iteration state and the step that follows the search for `T(θ)`.
//!
//! Both drivers hand the engine the set of patterns with a nonzero update; the
//! engine owns everything else, always in the same order (patterns sorted by
//! DFS code, samples by index), so two drivers that find the same update set
//! produce bitwise identical iterates.

use std::collections::BTreeMap;

use super::step::{armijo_search, clamp_hessian, compute_t_j, gsr_keep, next_alpha_init};
use super::trace::Snapshot;
use super::FitConfig;
use crate::dfs::DfsCode;
use crate::error::{Error, Result};
use crate::indicator::IndicatorVector;
use crate::loss::Loss;
use crate::threads;

#[derive(Clone, Debug)]
pub(crate) struct Active {
    pub indicator: IndicatorVector,
    pub theta: f64,
}

/// A pattern whose update `T_j` is nonzero.
#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub code: DfsCode,
    pub indicator: IndicatorVector,
    pub target: f64,
}

pub(crate) struct StepReport {
    pub alpha: f64,
    pub hd_inf: f64,
    pub converged: bool,
    pub t_nonzero: Vec<DfsCode>,
}

pub(crate) struct Engine<'a> {
    loss: &'a dyn Loss,
    y: &'a [f64],
    cfg: &'a FitConfig,
    pub intercept: f64,
    pub active: BTreeMap<DfsCode, Active>,
    pub mu: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub objective: f64,
    alpha_prev: Option<f64>,
    iter: usize,
}

struct Coordinate<'c> {
    code: &'c DfsCode,
    indicator: &'c IndicatorVector,
    theta: f64,
    d: f64,
    grad: f64,
    hess: f64,
}

impl<'a> Engine<'a> {
    pub fn new(loss: &'a dyn Loss, y: &'a [f64], cfg: &'a FitConfig) -> Result<Self> {
        cfg.validate()?;
        for &yi in y {
            loss.check_label(yi)?;
        }
        let mut e = Engine {
            loss,
            y,
            cfg,
            intercept: 0.0,
            active: BTreeMap::new(),
            mu: vec![0.0; y.len()],
            d1: vec![0.0; y.len()],
            d2: vec![0.0; y.len()],
            objective: 0.0,
            alpha_prev: None,
            iter: 0,
        };
        e.objective = e.loss_sum(&e.mu) + e.penalty(e.active.values().map(|a| a.theta));
        if !e.objective.is_finite() {
            return Err(Error::NonFinite { iter: 0 });
        }
        Ok(e)
    }

    pub fn iter(&self) -> usize {
        self.iter
    }

    /// Per-sample first and second derivatives at the current `mu`.
    pub fn refresh(&mut self) {
        let (loss, y, mu) = (self.loss, self.y, &self.mu);
        threads::fill(&mut self.d1, |i| loss.d1(y[i], mu[i]));
        threads::fill(&mut self.d2, |i| loss.d2(y[i], mu[i]));
    }

    pub fn theta_of(&self, code: &DfsCode) -> f64 {
        self.active.get(code).map_or(0.0, |a| a.theta)
    }

    pub fn gradient(&self, indicator: &IndicatorVector) -> f64 {
        indicator.sum_over(&self.d1)
    }

    pub fn hessian(&self, indicator: &IndicatorVector) -> f64 {
        clamp_hessian(
            indicator.sum_over(&self.d2) + self.cfg.lambda2,
            self.cfg.hessian_min,
            self.cfg.hessian_max,
        )
    }

    /// `T_j` for a pattern column. Skips the Hessian when the dead zone
    /// already decides the answer.
    pub fn target(&self, indicator: &IndicatorVector, theta: f64) -> Result<f64> {
        let grad = self.gradient(indicator);
        if theta == 0.0 && grad.abs() <= self.cfg.lambda1 {
            return Ok(0.0);
        }
        compute_t_j(grad, theta, self.hessian(indicator), self.cfg.lambda1, self.cfg.lambda2)
    }

    fn loss_sum(&self, mu: &[f64]) -> f64 {
        let mut s = 0.0;
        for (y, m) in self.y.iter().zip(mu) {
            s += self.loss.value(*y, *m);
        }
        s
    }

    fn penalty(&self, thetas: impl Iterator<Item = f64>) -> f64 {
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for t in thetas {
            l1 += t.abs();
            l2 += t * t;
        }
        self.cfg.lambda1 * l1 + 0.5 * self.cfg.lambda2 * l2
    }

    pub fn train_error(&self) -> f64 {
        let mut s = 0.0;
        for (y, m) in self.y.iter().zip(&self.mu) {
            s += self.loss.error(*y, *m);
        }
        s / self.y.len() as f64
    }

    pub fn snapshot(&self, t_nonzero: Vec<DfsCode>) -> Snapshot {
        Snapshot {
            intercept: self.intercept,
            coefficients: self.active.iter().map(|(c, a)| (c.clone(), a.theta)).collect(),
            t_nonzero,
        }
    }

    /// Direction, block selection, line search and update for one iteration.
    /// `candidates` must hold every pattern with nonzero `T_j` and no others.
    pub fn step(&mut self, candidates: Vec<Candidate>) -> Result<StepReport> {
        let iter = self.iter;
        self.iter += 1;
        let cfg = self.cfg;
        let t_nonzero: Vec<DfsCode> = {
            let mut v: Vec<DfsCode> = candidates.iter().map(|c| c.code.clone()).collect();
            v.sort();
            v
        };

        // coordinates: active patterns (T = 0 unless a candidate says otherwise) ∪ candidates
        let mut targets: BTreeMap<&DfsCode, (&IndicatorVector, f64)> =
            self.active.iter().map(|(c, a)| (c, (&a.indicator, 0.0))).collect();
        for c in &candidates {
            targets.insert(&c.code, (&c.indicator, c.target));
        }
        let mut coords: Vec<Coordinate<'_>> = Vec::with_capacity(targets.len());
        for (code, (indicator, target)) in targets {
            let theta = self.theta_of(code);
            coords.push(Coordinate {
                code,
                indicator,
                theta,
                d: target - theta,
                grad: self.gradient(indicator),
                hess: self.hessian(indicator),
            });
        }

        let mut g0 = 0.0;
        let mut h0 = 0.0;
        for (a, b) in self.d1.iter().zip(&self.d2) {
            g0 += a;
            h0 += b;
        }
        let h0 = clamp_hessian(h0, cfg.hessian_min, cfg.hessian_max);
        let d0 = compute_t_j(g0, self.intercept, h0, 0.0, 0.0)? - self.intercept;

        let d_inf = coords.iter().fold(d0.abs(), |m, c| m.max(c.d.abs()));
        if d_inf == 0.0 {
            return Ok(StepReport {
                alpha: 0.0,
                hd_inf: 0.0,
                converged: true,
                t_nonzero,
            });
        }
        for c in coords.iter_mut() {
            if !gsr_keep(c.d.abs(), d_inf, cfg.gsr_v) {
                c.d = 0.0;
            }
        }

        let mut delta = g0 * d0 + cfg.gamma * h0 * d0 * d0;
        for c in coords.iter().filter(|c| c.d != 0.0) {
            delta += (c.grad + cfg.lambda2 * c.theta) * c.d
                + cfg.gamma * c.hess * c.d * c.d
                + cfg.lambda1 * ((c.theta + c.d).abs() - c.theta.abs());
        }

        let mut dmu = vec![d0; self.mu.len()];
        for c in coords.iter().filter(|c| c.d != 0.0) {
            for i in c.indicator.iter_ones() {
                dmu[i] += c.d;
            }
        }

        let mut trial = vec![0.0; self.mu.len()];
        let alpha_init = next_alpha_init(self.alpha_prev, cfg.backtrack);
        let (alpha, f_new) = {
            let mu = &self.mu;
            let this = &*self;
            let coords = &coords;
            armijo_search(self.objective, delta, alpha_init, cfg.sigma, cfg.backtrack, iter, |alpha| {
                threads::fill(&mut trial, |i| mu[i] + alpha * dmu[i]);
                this.loss_sum(&trial) + this.penalty(coords.iter().map(|c| c.theta + alpha * c.d))
            })?
        };
        if !f_new.is_finite() {
            return Err(Error::NonFinite { iter });
        }

        let mut hd_inf = (h0 * d0).abs();
        for c in coords.iter().filter(|c| c.d != 0.0) {
            hd_inf = hd_inf.max((c.hess * c.d).abs());
        }

        // apply
        let mut next: BTreeMap<DfsCode, Active> = BTreeMap::new();
        for c in &coords {
            let theta = c.theta + alpha * c.d;
            if theta != 0.0 {
                next.insert(
                    c.code.clone(),
                    Active {
                        indicator: c.indicator.clone(),
                        theta,
                    },
                );
            }
        }
        drop(coords);
        self.intercept += alpha * d0;
        self.active = next;
        let (mu, dmu_ref) = (&mut self.mu, &dmu);
        let old = mu.clone();
        threads::fill(mu, |i| old[i] + alpha * dmu_ref[i]);
        self.objective = f_new;
        self.alpha_prev = Some(alpha);

        Ok(StepReport {
            alpha,
            hd_inf,
            converged: hd_inf <= cfg.eps,
            t_nonzero,
        })
    }
}
