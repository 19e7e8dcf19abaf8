//! Update arithmetic shared by the tree-based fit and the dense reference.

use std::collections::BTreeMap;

use crate::bounds::BoundPair;
use crate::error::{Error, Result};
use crate::indicator::IndicatorVector;
use crate::loss::Loss;

/// Smallest step tried before the line search gives up.
pub const MIN_ALPHA: f64 = 1e-15;

pub fn clamp_hessian(h: f64, min: f64, max: f64) -> f64 {
    h.clamp(min, max)
}

/// Minimiser over `z` of `grad (z - θ) + λ2 θ (z - θ) + H/2 (z - θ)^2 + λ1 |z|`,
/// where `grad` is the loss part of the gradient and `H` already includes λ2.
pub fn compute_t_j(grad: f64, theta: f64, h: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("diagonal Hessian entry must be positive, got {h}")));
    }
    let b = grad + (lambda2 - h) * theta;
    Ok(if b < -lambda1 {
        -(b + lambda1) / h
    } else if b > lambda1 {
        -(b - lambda1) / h
    } else {
        0.0
    })
}

/// `∂f/∂θ_j` of the smooth part `sum_i L(y_i, mu_i) + λ2/2 ||θ||^2` along the
/// column `indicator`, at outputs `mu` and coefficient `theta`.
pub fn smooth_gradient(
    loss: &dyn Loss,
    y: &[f64],
    mu: &[f64],
    indicator: &IndicatorVector,
    theta: f64,
    lambda2: f64,
) -> f64 {
    let mut g = 0.0;
    for i in indicator.iter_ones() {
        g += loss.d1(y[i], mu[i]);
    }
    g + lambda2 * theta
}

/// Range of `sum_i d1_i I(x_k in g_i)` over every descendant `x_k` of a node
/// with the given indicator.
pub fn loss_gradient_bounds(indicator: &IndicatorVector, d1: &[f64]) -> BoundPair {
    let mut lower = 0.0;
    let mut upper = 0.0;
    for i in indicator.iter_ones() {
        if d1[i] < 0.0 {
            lower += d1[i];
        } else {
            upper += d1[i];
        }
    }
    BoundPair::new(lower, upper)
}

/// True when no strict descendant can have a nonzero update.
pub fn prune_test(l: BoundPair, b: BoundPair, lambda1: f64) -> bool {
    (l.upper + b.upper).max(-l.lower - b.lower) <= lambda1
}

/// Whether a coordinate survives the block rule. Coordinates attaining the
/// maximum always survive.
pub(crate) fn gsr_keep(abs_d: f64, d_inf: f64, v: f64) -> bool {
    abs_d > 0.0 && (abs_d == d_inf || abs_d > v * d_inf)
}

/// Drops every coordinate with `|d_j| <= v ||d||_inf`, except those attaining
/// the maximum. An all-zero direction yields an empty map.
pub fn gauss_southwell_r<K: Ord + Clone>(d: &BTreeMap<K, f64>, v: f64) -> BTreeMap<K, f64> {
    let d_inf = d.values().fold(0.0f64, |m, x| m.max(x.abs()));
    d.iter()
        .filter(|(_, x)| gsr_keep(x.abs(), d_inf, v))
        .map(|(k, &x)| (k.clone(), x))
        .collect()
}

/// `α_init(0) = 1`, `α_init(t) = min(α(t-1) / s^5, 1)`.
pub fn next_alpha_init(prev: Option<f64>, backtrack: f64) -> f64 {
    match prev {
        None => 1.0,
        Some(a) => (a / backtrack.powi(5)).min(1.0),
    }
}

/// Largest `α = α_init s^j` with `F(α) <= F(0) + α σ Δ`. Returns `α` and
/// `F(α)`. `eval` must return the objective at step `α`.
pub fn armijo_search(
    f_current: f64,
    delta: f64,
    alpha_init: f64,
    sigma: f64,
    backtrack: f64,
    iter: usize,
    mut eval: impl FnMut(f64) -> f64,
) -> Result<(f64, f64)> {
    let mut alpha = alpha_init;
    while alpha >= MIN_ALPHA {
        let f = eval(alpha);
        if f <= f_current + alpha * sigma * delta {
            return Ok((alpha, f));
        }
        alpha *= backtrack;
    }
    Err(Error::LineSearch {
        iter,
        min_alpha: MIN_ALPHA,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_cases() {
        // with θ = 0 and λ2 = 0, b = grad
        assert_eq!(compute_t_j(3.0, 0.0, 2.0, 1.0, 0.0).unwrap(), -1.0);
        assert_eq!(compute_t_j(-3.0, 0.0, 2.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(compute_t_j(0.5, 0.0, 2.0, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(compute_t_j(-1.0, 0.0, 2.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(matches!(compute_t_j(1.0, 0.0, 0.0, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_minimises_the_local_model() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let grad = rng.gen_range(-3.0..3.0);
            let theta = rng.gen_range(-2.0..2.0);
            let l2 = rng.gen_range(0.0..1.0);
            let h = rng.gen_range(0.1..3.0) + l2;
            let l1 = rng.gen_range(0.0..2.0);
            let model = |z: f64| (grad + l2 * theta) * (z - theta) + 0.5 * h * (z - theta).powi(2) + l1 * z.abs();
            let t = compute_t_j(grad, theta, h, l1, l2).unwrap();
            for dz in [-1e-3, 1e-3, -0.1, 0.1] {
                assert!(model(t) <= model(t + dz) + 1e-12);
            }
        }
    }

    #[test]
    fn gradient_bounds_cases() {
        let ind = IndicatorVector::from_bools(&[true, true, false, true]);
        let b = loss_gradient_bounds(&ind, &[0.5, -0.25, 9.0, 1.0]);
        assert_eq!(b, BoundPair::new(-0.25, 1.5));
        let b = loss_gradient_bounds(&ind, &[0.5, 0.25, -9.0, 1.0]);
        assert_eq!(b.lower, 0.0);
        let b = loss_gradient_bounds(&IndicatorVector::zeros(4), &[1.0; 4]);
        assert_eq!(b, BoundPair::new(0.0, 0.0));
    }

    #[test]
    fn prune_cases() {
        let zero = BoundPair::new(0.0, 0.0);
        assert!(prune_test(BoundPair::new(-0.2, 0.3), zero, 0.5));
        assert!(!prune_test(BoundPair::new(-2.0, 0.0), zero, 0.5));
        assert!(!prune_test(BoundPair::new(-0.2, 0.3), BoundPair::new(0.0, 0.3), 0.5));
    }

    #[test]
    fn block_rule_cases() {
        let d = BTreeMap::from([("a", 1.0), ("b", 0.5), ("c", 0.95)]);
        let kept = gauss_southwell_r(&d, 0.9);
        assert_eq!(kept, BTreeMap::from([("a", 1.0), ("c", 0.95)]));
        let single = BTreeMap::from([("a", -0.2)]);
        assert_eq!(gauss_southwell_r(&single, 0.9), single);
        assert_eq!(gauss_southwell_r(&d, 1e-12), d);
        // v = 1 keeps only coordinates tied at the maximum
        let tied = BTreeMap::from([("a", 1.0), ("b", -1.0), ("c", 0.999)]);
        assert_eq!(gauss_southwell_r(&tied, 1.0).len(), 2);
        assert!(gauss_southwell_r(&BTreeMap::from([("a", 0.0)]), 0.5).is_empty());
    }

    #[test]
    fn alpha_init_rule() {
        assert_eq!(next_alpha_init(None, 0.5), 1.0);
        assert_eq!(next_alpha_init(Some(1.0 / 64.0), 0.5), 0.5);
        assert_eq!(next_alpha_init(Some(0.5), 0.5), 1.0);
    }

    #[test]
    fn armijo_accepts_first_candidate_when_possible() {
        // F(α) = (1 - α)^2, d = 1 from θ = 0: exact minimiser at α = 1
        let (a, f) = armijo_search(1.0, -2.0, 1.0, 0.1, 0.5, 0, |a| (1.0 - a) * (1.0 - a)).unwrap();
        assert_eq!((a, f), (1.0, 0.0));
    }

    #[test]
    fn armijo_backtracks_and_satisfies_the_condition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            // F(α) = c (α d - m)^2 with descent direction d toward m
            let c = rng.gen_range(0.1..5.0);
            let m = rng.gen_range(0.1..2.0);
            let d = rng.gen_range(0.1..10.0);
            let f = |a: f64| c * (a * d - m).powi(2);
            let delta = -2.0 * c * m * d;
            let (a, fa) = armijo_search(f(0.0), delta, 1.0, 0.1, 0.5, 0, f).unwrap();
            assert!(fa <= f(0.0) + a * 0.1 * delta);
            assert!(fa < f(0.0));
            if a < 1.0 {
                assert!(f(a / 0.5) > f(0.0) + a / 0.5 * 0.1 * delta);
            }
        }
    }

    #[test]
    fn armijo_reports_failure() {
        let err = armijo_search(0.0, -1.0, 1.0, 0.1, 0.5, 7, |_| 1.0).unwrap_err();
        assert!(matches!(err, Error::LineSearch { iter: 7, .. }));
    }
}
