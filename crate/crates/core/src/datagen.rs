//! Class-labeled random graph benchmarks.
//!
//! A pool of `V + W` random seed graphs is grown first; every output graph
//! then joins a random subset of the seeds into one connected graph. Seeds of
//! pool `A` enter positives with probability `p1` and negatives with `p2`;
//! seeds of pool `B` use `q1` and `q2`.
//!
//! Randomness comes from ChaCha8 streams of one 64-bit seed: stream 0 grows the
//! seed pool, and output sample `k` of split `s` uses stream `1 + s * 2^32 + k`
//! on its own. Datasets are therefore identical across platforms and worker
//! counts, and a test split can share the training split's pool.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::dfs::{min_dfs_code, DfsCode};
use crate::error::{Error, Result};
use crate::graph::{GraphDataset, Label, LabeledGraph};
use crate::threads;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub v: usize,
    pub w: usize,
    pub n: usize,
    pub m: usize,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub poisson_mean: f64,
    pub n_node_labels: u32,
    pub n_edge_labels: u32,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            v: 50,
            w: 50,
            n: 500,
            m: 500,
            p1: 0.7,
            p2: 0.3,
            q1: 0.3,
            q2: 0.7,
            poisson_mean: 3.0,
            n_node_labels: 5,
            n_edge_labels: 5,
            seed: 1,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Domain(format!("invalid generator parameters: {what}")));
        for (name, x) in [("V", self.v), ("W", self.w), ("N", self.n), ("M", self.m)] {
            if x == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("q1", self.q1), ("q2", self.q2)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if !(self.poisson_mean > 0.0 && self.poisson_mean.is_finite()) {
            return bad("Poisson mean must be positive".into());
        }
        if self.n_node_labels == 0 || self.n_edge_labels == 0 {
            return bad("label counts must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedPool {
    pub a: Vec<LabeledGraph>,
    pub b: Vec<LabeledGraph>,
}

impl SeedPool {
    /// `A` seeds followed by `B` seeds.
    pub fn all(&self) -> impl Iterator<Item = &LabeledGraph> {
        self.a.iter().chain(&self.b)
    }
}

/// One output graph, the seeds it was built from (indices into
/// [`SeedPool::all`]) and its label.
#[derive(Clone, Debug)]
pub struct Sample {
    pub graph: LabeledGraph,
    pub seeds: Vec<usize>,
    pub label: f64,
}

/// Attempts per requested seed before giving up on finding new graphs.
const RETRIES_PER_SEED: usize = 1000;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The stream of output sample `k` in split `split`.
pub fn sample_stream(split: u32, k: usize) -> u64 {
    1 + ((split as u64) << 32) + k as u64
}

/// A Poisson growth length, resampled until it is at least 2.
fn growth_length(poisson: &Poisson<f64>, rng: &mut impl Rng) -> usize {
    loop {
        let a = poisson.sample(rng);
        if a >= 2.0 {
            return a as usize;
        }
    }
}

/// Grows one random connected graph: one labeled edge, then `a` random moves.
pub fn grow_seed(a: usize, n_node_labels: u32, n_edge_labels: u32, rng: &mut impl Rng) -> LabeledGraph {
    let node = |rng: &mut dyn rand::RngCore| rng.gen_range(0..n_node_labels) as Label;
    let mut g = LabeledGraph::new(vec![node(rng), node(rng)], vec![], None).expect("valid graph");
    g.add_edge(0, 1, rng.gen_range(0..n_edge_labels)).expect("fresh edge");
    for _ in 0..a {
        let alpha = rng.gen_range(0..g.node_count() as u32);
        let mut attached = false;
        if rng.gen_bool(0.5) {
            let free: Vec<u32> = (0..g.node_count() as u32)
                .filter(|&u| u != alpha && g.edge_between(alpha, u).is_none())
                .collect();
            if let Some(&u) = free.choose(rng) {
                g.add_edge(alpha, u, rng.gen_range(0..n_edge_labels)).expect("non-adjacent pair");
                attached = true;
            }
        }
        if !attached {
            let fresh = g.add_node(node(rng));
            g.add_edge(alpha, fresh, rng.gen_range(0..n_edge_labels)).expect("fresh node");
        }
    }
    g
}

/// `V + W` pairwise non-isomorphic seed graphs from stream 0.
pub fn generate_seed_pool(params: &GenParams) -> Result<SeedPool> {
    params.validate()?;
    generate_seed_pool_with(params, &mut stream_rng(params.seed, 0))
}

pub fn generate_seed_pool_with(params: &GenParams, rng: &mut impl Rng) -> Result<SeedPool> {
    grow_pool(params, rng, RETRIES_PER_SEED * (params.v + params.w))
}

fn grow_pool(params: &GenParams, rng: &mut impl Rng, max_attempts: usize) -> Result<SeedPool> {
    params.validate()?;
    let poisson = Poisson::new(params.poisson_mean).map_err(|e| Error::Domain(e.to_string()))?;
    let want = params.v + params.w;
    let mut seen: HashSet<DfsCode> = HashSet::new();
    let mut pool = Vec::with_capacity(want);
    let mut attempts = 0;
    while pool.len() < want {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Generation(format!(
                "only {} distinct seed graphs after {} attempts",
                pool.len(),
                attempts - 1
            )));
        }
        let a = growth_length(&poisson, rng);
        let g = grow_seed(a, params.n_node_labels, params.n_edge_labels, rng);
        if seen.insert(min_dfs_code(&g)?) {
            pool.push(g);
        }
    }
    let b = pool.split_off(params.v);
    Ok(SeedPool { a: pool, b })
}

/// Joins the graphs in order, bridging each next graph to the accumulated one
/// by a new edge between uniformly chosen nodes. Bridge labels are uniform.
pub fn combine(graphs: &[&LabeledGraph], n_edge_labels: u32, rng: &mut impl Rng) -> Result<LabeledGraph> {
    let (first, rest) = graphs
        .split_first()
        .ok_or_else(|| Error::Domain("combine needs at least one graph".into()))?;
    let mut out = (*first).clone();
    out.set_id(None);
    for g in rest {
        let anchor = rng.gen_range(0..out.node_count() as u32);
        let offset = out.node_count() as u32;
        for v in 0..g.node_count() as u32 {
            out.add_node(g.node_label(v));
        }
        for e in g.edges() {
            out.add_edge(e.u + offset, e.v + offset, e.label)?;
        }
        let other = offset + rng.gen_range(0..g.node_count() as u32);
        out.add_edge(anchor, other, rng.gen_range(0..n_edge_labels))?;
    }
    Ok(out)
}

fn draw_sample(params: &GenParams, pool: &SeedPool, positive: bool, rng: &mut impl Rng) -> Result<Sample> {
    let (pa, pb) = if positive { (params.p1, params.q1) } else { (params.p2, params.q2) };
    if pa == 0.0 && pb == 0.0 {
        return Err(Error::Generation(format!(
            "{} samples can never select a seed",
            if positive { "positive" } else { "negative" }
        )));
    }
    loop {
        let mut seeds = Vec::new();
        for k in 0..pool.a.len() {
            if rng.gen_bool(pa) {
                seeds.push(k);
            }
        }
        for k in 0..pool.b.len() {
            if rng.gen_bool(pb) {
                seeds.push(pool.a.len() + k);
            }
        }
        if seeds.is_empty() {
            continue;
        }
        let all: Vec<&LabeledGraph> = pool.all().collect();
        let chosen: Vec<&LabeledGraph> = seeds.iter().map(|&k| all[k]).collect();
        let graph = combine(&chosen, params.n_edge_labels, rng)?;
        return Ok(Sample {
            graph,
            seeds,
            label: if positive { 1.0 } else { 0.0 },
        });
    }
}

/// `N` positives followed by `M` negatives for split `split`.
pub fn generate_samples(params: &GenParams, pool: &SeedPool, split: u32) -> Result<Vec<Sample>> {
    params.validate()?;
    let total = params.n + params.m;
    let make = |k: usize| {
        let mut rng = stream_rng(params.seed, sample_stream(split, k));
        draw_sample(params, pool, k < params.n, &mut rng).map(|mut s| {
            s.graph.set_id(Some(k as i64));
            s
        })
    };
    use rayon::prelude::*;
    threads::pool().install(|| (0..total).into_par_iter().map(make).collect())
}

pub fn generate_dataset(params: &GenParams, pool: &SeedPool, split: u32) -> Result<GraphDataset> {
    let samples = generate_samples(params, pool, split)?;
    let (graphs, labels) = samples.into_iter().map(|s| (s.graph, s.label)).unzip();
    GraphDataset::new(graphs, labels)
}
