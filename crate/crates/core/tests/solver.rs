//! The fitted objective against an independent accelerated proximal gradient
//! solver on an explicit design matrix built by edge-subset enumeration.

use graphsparse::contains::contains;
use graphsparse::datagen::{generate_dataset, generate_seed_pool, GenParams};
use graphsparse::loss::{Logistic, Squared};
use graphsparse::oracle::brute_force_patterns;
use graphsparse::{fit, FitConfig, GraphDataset, Loss};

const MAX_EDGES: usize = 3;

fn dataset(seed: u64) -> GraphDataset {
    let params = GenParams {
        v: 3,
        w: 3,
        n: 10,
        m: 10,
        seed,
        ..GenParams::default()
    };
    let pool = generate_seed_pool(&params).unwrap();
    generate_dataset(&params, &pool, 0).unwrap()
}

fn columns(ds: &GraphDataset) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = brute_force_patterns(ds, MAX_EDGES)
        .unwrap()
        .iter()
        .map(|c| ds.graphs.iter().map(|g| contains(g, c) as u8 as f64).collect())
        .collect();
    // duplicate columns leave the optimal value unchanged
    cols.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cols.dedup();
    cols
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    logistic: bool,
    l1: f64,
    l2: f64,
}

impl Problem<'_> {
    fn mu(&self, b0: f64, beta: &[f64]) -> Vec<f64> {
        let mut mu = vec![b0; self.y.len()];
        for (c, b) in self.x.iter().zip(beta) {
            for (m, v) in mu.iter_mut().zip(c) {
                *m += b * v;
            }
        }
        mu
    }

    fn residual(&self, mu: &[f64]) -> Vec<f64> {
        self.y
            .iter()
            .zip(mu)
            .map(|(y, m)| if self.logistic { 1.0 / (1.0 + (-m).exp()) - y } else { m - y })
            .collect()
    }

    fn objective(&self, b0: f64, beta: &[f64]) -> f64 {
        let loss: f64 = self
            .y
            .iter()
            .zip(self.mu(b0, beta))
            .map(|(y, m)| {
                if self.logistic {
                    (if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() }) - y * m
                } else {
                    0.5 * (y - m) * (y - m)
                }
            })
            .sum();
        loss + self.l1 * beta.iter().map(|b| b.abs()).sum::<f64>() + 0.5 * self.l2 * beta.iter().map(|b| b * b).sum::<f64>()
    }

    /// FISTA with a fixed step from a Frobenius bound on the Lipschitz constant.
    fn solve(&self, iters: usize) -> f64 {
        let curv = if self.logistic { 0.25 } else { 1.0 };
        let frob: f64 = self.y.len() as f64 + self.x.iter().flatten().map(|v| v * v).sum::<f64>();
        let step = 1.0 / (curv * frob + self.l2);
        let p = self.x.len();
        let (mut b0, mut beta) = (0.0, vec![0.0; p]);
        let (mut z0, mut z) = (0.0, vec![0.0; p]);
        let mut t = 1.0;
        for _ in 0..iters {
            let r = self.residual(&self.mu(z0, &z));
            let nb0 = z0 - step * r.iter().sum::<f64>();
            let nbeta: Vec<f64> = (0..p)
                .map(|j| {
                    let g: f64 = self.x[j].iter().zip(&r).map(|(v, ri)| v * ri).sum::<f64>() + self.l2 * z[j];
                    let u = z[j] - step * g;
                    u.signum() * (u.abs() - step * self.l1).max(0.0)
                })
                .collect();
            let nt = (1.0 + (1.0 + 4.0 * t * t as f64).sqrt()) / 2.0;
            let m = (t - 1.0) / nt;
            z0 = nb0 + m * (nb0 - b0);
            z = (0..p).map(|j| nbeta[j] + m * (nbeta[j] - beta[j])).collect();
            b0 = nb0;
            beta = nbeta;
            t = nt;
        }
        self.objective(b0, &beta)
    }
}

fn check(seed: u64, loss: &dyn Loss, logistic: bool, l1: f64, l2: f64) {
    let ds = dataset(seed);
    let x = columns(&ds);
    let cfg = FitConfig {
        lambda1: l1,
        lambda2: l2,
        eps: 1e-7,
        max_iter: 20000,
        max_edges: Some(MAX_EDGES),
        ..FitConfig::default()
    };
    let res = fit(&ds, loss, &cfg).unwrap();
    assert!(res.converged, "seed {seed}: {} iterations, last {:?}", res.trace.len(), res.trace.last().map(|r| (r.objective, r.hd_inf, r.n_features)));
    let ours = res.trace.last().unwrap().objective;
    let problem = Problem {
        x: &x,
        y: &ds.labels,
        logistic,
        l1,
        l2,
    };
    let reference = problem.solve(20000);
    let rel = (ours - reference) / reference.abs();
    assert!(rel.abs() < 1e-4, "seed {seed}: {ours} vs {reference}");
}

#[test]
fn logistic_objective_matches_proximal_gradient() {
    check(3, &Logistic, true, 1.0, 0.0);
    check(4, &Logistic, true, 0.5, 0.2);
}

#[test]
fn squared_objective_matches_proximal_gradient() {
    check(5, &Squared, false, 0.5, 0.0);
    check(6, &Squared, false, 0.2, 1.0);
}
