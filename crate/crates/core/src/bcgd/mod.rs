//! Block coordinate gradient descent over subgraph indicator coordinates.
//!
//! The objective is
//!
//! ```text
//! F(b0, beta) = sum_i L(y_i, mu_i) + λ1 ||beta||_1 + λ2/2 ||beta||_2^2
//! mu_i        = b0 + sum_j beta_j I(x_j in g_i)
//! ```
//!
//! Each iteration computes the coordinate-wise minimiser `T(θ)` of a diagonal
//! quadratic model, keeps the Gauss-Southwell-r block of `d = T(θ) - θ`, and
//! takes an Armijo step. The nonzero part of `T(θ)` is found by a pruned
//! traversal of the enumeration tree; [`crate::oracle::reference_fit`] runs the
//! same [`engine`] on an explicit design matrix instead.

pub(crate) mod engine;
mod fit;
mod model;
mod step;
mod trace;

pub use fit::{fit, fit_observed};
pub(crate) use fit::build_model as engine_model;
pub use model::{predict, Feature, SparseModel};
pub use step::{
    armijo_search, clamp_hessian, compute_t_j, gauss_southwell_r, loss_gradient_bounds, next_alpha_init, prune_test,
    smooth_gradient, MIN_ALPHA,
};
pub use trace::{read_trace_csv, write_trace_csv, FitResult, Snapshot, TraceRow};

use crate::error::{Error, Result};

/// Optimizer settings. Defaults: `σ = 0.1`, `s = 0.5`, `γ = 0`, `v = 0.9`,
/// `ε = 1e-3`, Hessian entries clamped to `[1e-10, 1e10]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Armijo sufficient-decrease factor.
    pub sigma: f64,
    /// Armijo backtracking ratio.
    pub backtrack: f64,
    /// Weight of the curvature term in the Armijo decrement.
    pub gamma: f64,
    /// Gauss-Southwell-r threshold.
    pub gsr_v: f64,
    /// Stop when `||H d||_inf` falls to this value.
    pub eps: f64,
    pub max_iter: usize,
    pub hessian_min: f64,
    pub hessian_max: f64,
    /// Level limit on pattern size; `None` searches every pattern.
    pub max_edges: Option<usize>,
    /// Disable to traverse every node at every iteration.
    pub prune: bool,
    /// Store coefficients and the nonzero update set in every trace row.
    pub record_coefficients: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda1: 0.01,
            lambda2: 0.0,
            sigma: 0.1,
            backtrack: 0.5,
            gamma: 0.0,
            gsr_v: 0.9,
            eps: 1e-3,
            max_iter: 1000,
            hessian_min: 1e-10,
            hessian_max: 1e10,
            max_edges: None,
            prune: true,
            record_coefficients: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("invalid configuration: {what}")));
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return bad("l1 must be finite and non-negative");
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad("l2 must be finite and non-negative");
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad("sigma must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.gsr_v > 0.0 && self.gsr_v <= 1.0) {
            return bad("gsr-v must lie in (0, 1]");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive");
        }
        if self.max_iter == 0 {
            return bad("max-iter must be at least 1");
        }
        if !(self.hessian_min > 0.0 && self.hessian_min < self.hessian_max) {
            return bad("Hessian clamp must satisfy 0 < min < max");
        }
        Ok(())
    }
}
