//! Command-line front end.

mod curves;
mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphsparse::bcgd::{fit_observed, write_trace_csv, FitConfig, SparseModel};
use graphsparse::bounds::{best_correlation_feature_with, best_error_feature_with, best_gain_feature_with, SearchOptions};
use graphsparse::contains::contains;
use graphsparse::datagen::{generate_dataset, generate_seed_pool, GenParams, SeedPool};
use graphsparse::oracle::{build_design_matrix, compare_traces, reference_fit, DEFAULT_ORACLE_MAX_EDGES};
use graphsparse::{predict, DfsCode, Error, GraphDataset, IndicatorVector, LossKind};
use manifest::RunManifest;
use serde_json::json;

/// Prints a line to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_ORACLE: u8 = 3;

/// Oracle runs compare iterates to this absolute tolerance.
const ORACLE_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "graphsparse", version, about = "Sparse learning with subgraph indicator features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a class-labeled random graph benchmark (train and test splits).
    Generate(GenerateArgs),
    /// Fit a sparse model.
    Train(TrainArgs),
    /// Print mu (and the probability for logistic models) per graph.
    Predict(PredictArgs),
    /// Classification metrics of a model on a labeled dataset.
    Evaluate(PredictArgs),
    /// Average several trace files into learning-curve tables.
    Curves(CurvesArgs),
    /// Single best feature by branch and bound.
    Mine(MineArgs),
    /// Write the explicit level-limited design matrix.
    ExportMatrix(ExportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long = "V")]
    v: usize,
    #[arg(long = "W")]
    w: usize,
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "M")]
    m: usize,
    #[arg(long, default_value_t = 0.7)]
    p1: f64,
    #[arg(long, default_value_t = 0.3)]
    q1: f64,
    #[arg(long, default_value_t = 0.3)]
    p2: f64,
    #[arg(long, default_value_t = 0.7)]
    q2: f64,
    #[arg(long, default_value_t = 3.0)]
    poisson_mean: f64,
    #[arg(long, default_value_t = 5)]
    node_labels: u32,
    #[arg(long, default_value_t = 5)]
    edge_labels: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for train.txt, test.txt, seeds.txt and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Logistic,
    Squared,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Logistic => LossKind::Logistic,
            LossArg::Squared => LossKind::Squared,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Model output file.
    #[arg(long)]
    model: PathBuf,
    /// Trace CSV output.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Manifest output (defaults to <model>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Held-out dataset; its error is added to every trace row.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "logistic")]
    loss: LossArg,
    #[arg(long, default_value_t = 0.01)]
    l1: f64,
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    backtrack: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.9)]
    gsr_v: f64,
    /// Recorded in the manifest; training itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Traverse the whole (level-limited) tree at every iteration.
    #[arg(long)]
    no_prune: bool,
    /// Also run the dense reference optimizer and compare iterates.
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct CurvesArgs {
    /// Trace CSV files.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchKind {
    Gain,
    Error,
    Correlation,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    search: SearchKind,
    /// Whitespace-separated per-graph weights (default: all ones).
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    max_edges: Option<usize>,
    /// Disable branch and bound.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ORACLE_MAX_EDGES)]
    max_edges: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Lib(Error),
    Oracle(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Mine(a) => cmd_mine(a),
        Command::ExportMatrix(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION })
        }
        Err(Failure::Oracle(msg)) => {
            eprintln!("oracle mismatch: {msg}");
            ExitCode::from(EXIT_ORACLE)
        }
    }
}

fn pool_dataset(pool: &SeedPool) -> graphsparse::Result<GraphDataset> {
    let graphs: Vec<_> = pool.all().cloned().collect();
    let labels = pool.a.iter().map(|_| 1.0).chain(pool.b.iter().map(|_| 0.0)).collect();
    GraphDataset::new(graphs, labels)
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let start = Instant::now();
    let params = GenParams {
        v: a.v,
        w: a.w,
        n: a.n,
        m: a.m,
        p1: a.p1,
        p2: a.p2,
        q1: a.q1,
        q2: a.q2,
        poisson_mean: a.poisson_mean,
        n_node_labels: a.node_labels,
        n_edge_labels: a.edge_labels,
        seed: a.seed,
    };
    let pool = generate_seed_pool(&params)?;
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    let train = generate_dataset(&params, &pool, 0)?;
    let test = generate_dataset(&params, &pool, 1)?;
    let paths = [a.out.join("train.txt"), a.out.join("test.txt"), a.out.join("seeds.txt")];
    train.save(&paths[0])?;
    test.save(&paths[1])?;
    pool_dataset(&pool)?.save(&paths[2])?;
    let mut m = RunManifest::new("generate", json!(params), start);
    m.seed = Some(a.seed);
    m.outputs = paths.iter().map(|p| p.display().to_string()).collect();
    m.extra = json!({
        "rng": "ChaCha8; stream 0 grows the seed pool, sample k of split s uses stream 1 + s*2^32 + k",
        "splits": {"train": 0, "test": 1},
        "seeds_file": "A seeds labeled 1, B seeds labeled 0",
    });
    m.write(&a.out.join("manifest.json"))?;
    out!(
        "wrote {} train and {} test graphs to {}",
        train.len(),
        test.len(),
        a.out.display()
    );
    Ok(())
}

/// Test-set indicator cache, so each model pattern is matched once.
struct TestEval<'a> {
    data: &'a GraphDataset,
    loss: LossKind,
    cache: std::collections::HashMap<DfsCode, IndicatorVector>,
}

impl TestEval<'_> {
    fn error(&mut self, model: &SparseModel) -> f64 {
        let mut mu = vec![model.intercept; self.data.len()];
        for f in &model.features {
            let data = self.data;
            let ind = self.cache.entry(f.code.clone()).or_insert_with(|| {
                IndicatorVector::from_indices(
                    data.len(),
                    data.graphs.iter().enumerate().filter(|(_, g)| contains(g, &f.code)).map(|(i, _)| i),
                )
            });
            for i in ind.iter_ones() {
                mu[i] += f.coef;
            }
        }
        let loss = self.loss.loss();
        let total: f64 = self.data.labels.iter().zip(&mu).map(|(&y, &m)| loss.error(y, m)).sum();
        total / self.data.len() as f64
    }
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    let start = Instant::now();
    let data = GraphDataset::load(&a.data)?;
    let test = a.test.as_ref().map(GraphDataset::load).transpose()?;
    let loss_kind: LossKind = a.loss.into();
    let loss = loss_kind.loss();
    if let Some(t) = &test {
        for &y in &t.labels {
            loss.check_label(y)?;
        }
    }
    let max_edges = match (a.max_edges, a.oracle_check) {
        (None, true) => Some(DEFAULT_ORACLE_MAX_EDGES),
        (m, _) => m,
    };
    let config = FitConfig {
        lambda1: a.l1,
        lambda2: a.l2,
        sigma: a.sigma,
        backtrack: a.backtrack,
        gamma: a.gamma,
        gsr_v: a.gsr_v,
        eps: a.eps,
        max_iter: a.max_iter,
        max_edges,
        prune: !a.no_prune,
        record_coefficients: a.oracle_check,
        ..FitConfig::default()
    };
    let mut eval = test.as_ref().map(|t| TestEval {
        data: t,
        loss: loss_kind,
        cache: Default::default(),
    });
    let result = fit_observed(&data, loss, &config, &mut |m| eval.as_mut().map(|e| e.error(m)))?;
    result.model.save(&a.model)?;
    if let Some(p) = &a.trace {
        std::fs::write(p, write_trace_csv(&result.trace)).map_err(Error::from)?;
    }

    let mut oracle_status = serde_json::Value::Null;
    let mut mismatch = None;
    if a.oracle_check {
        let limit = max_edges.expect("set above");
        let matrix = build_design_matrix(&data, limit)?;
        let dense = reference_fit(&matrix, &data.labels, loss, &config)?;
        match compare_traces(&result.trace, &dense.trace, ORACLE_TOL) {
            Ok(()) => oracle_status = json!({"max_edges": limit, "columns": matrix.columns.len(), "agree": true}),
            Err(msg) => {
                oracle_status = json!({"max_edges": limit, "agree": false, "detail": msg});
                mismatch = Some(msg);
            }
        }
    }

    let mut m = RunManifest::new(
        "train",
        json!({
            "loss": loss_kind.name(), "l1": a.l1, "l2": a.l2, "eps": a.eps, "max_iter": a.max_iter,
            "max_edges": max_edges, "sigma": a.sigma, "backtrack": a.backtrack, "gamma": a.gamma,
            "gsr_v": a.gsr_v, "prune": !a.no_prune,
        }),
        start,
    );
    m.seed = Some(a.seed);
    m.inputs = std::iter::once(&a.data).chain(a.test.as_ref()).map(|p| p.display().to_string()).collect();
    m.outputs = std::iter::once(&a.model).chain(a.trace.as_ref()).map(|p| p.display().to_string()).collect();
    m.set_trace(&result.trace);
    m.extra = json!({"converged": result.converged, "oracle": oracle_status});
    let manifest_path = a.manifest.clone().unwrap_or_else(|| suffixed(&a.model, ".manifest.json"));
    m.write(&manifest_path)?;

    let last = result.trace.last();
    out!(
        "iterations {} converged {} features {} objective {} train_error {}",
        result.trace.len(),
        result.converged,
        result.model.features.len(),
        last.map_or(result.initial_objective, |r| r.objective),
        last.map_or(f64::NAN, |r| r.train_error),
    );
    if let Some(e) = last.and_then(|r| r.test_error) {
        out!("test_error {e}");
    }
    match mismatch {
        Some(msg) => Err(Failure::Oracle(msg)),
        None => {
            if a.oracle_check {
                out!("oracle check passed");
            }
            Ok(())
        }
    }
}

fn suffixed(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_predict(a: PredictArgs) -> CmdResult {
    let model = SparseModel::load(&a.model)?;
    let data = GraphDataset::load(&a.data)?;
    let logistic = model.loss == LossKind::Logistic.name();
    for (i, g) in data.graphs.iter().enumerate() {
        let mu = predict(&model, g);
        let id = g.id().unwrap_or(i as i64);
        if logistic {
            out!("{id} {mu} {}", 1.0 / (1.0 + (-mu).exp()));
        } else {
            out!("{id} {mu}");
        }
    }
    Ok(())
}

fn cmd_evaluate(a: PredictArgs) -> CmdResult {
    let model = SparseModel::load(&a.model)?;
    let data = GraphDataset::load(&a.data)?;
    let kind: LossKind = model.loss.parse()?;
    let loss = kind.loss();
    for &y in &data.labels {
        loss.check_label(y)?;
    }
    let mu: Vec<f64> = data.graphs.iter().map(|g| predict(&model, g)).collect();
    let n = data.len() as f64;
    match kind {
        LossKind::Logistic => {
            let (mut tp, mut tn, mut fp, mut fn_) = (0usize, 0usize, 0usize, 0usize);
            for (&y, &m) in data.labels.iter().zip(&mu) {
                match (y == 1.0, m > 0.0) {
                    (true, true) => tp += 1,
                    (false, false) => tn += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                }
            }
            let acc = (tp + tn) as f64 / n;
            out!("graphs {}", data.len());
            out!("accuracy {acc}");
            out!("error {}", 1.0 - acc);
            out!("positives {} (correct {tp}, missed {fn_})", tp + fn_);
            out!("negatives {} (correct {tn}, false alarms {fp})", tn + fp);
        }
        LossKind::Squared => {
            let mse: f64 = data.labels.iter().zip(&mu).map(|(y, m)| (y - m) * (y - m)).sum::<f64>() / n;
            out!("graphs {}", data.len());
            out!("mse {mse}");
        }
    }
    Ok(())
}

fn cmd_curves(a: CurvesArgs) -> CmdResult {
    let mut traces = Vec::new();
    for p in &a.traces {
        let text = std::fs::read_to_string(p).map_err(Error::from)?;
        traces.push(graphsparse::bcgd::read_trace_csv(&text)?);
    }
    let table = curves::learning_curves(&traces);
    match &a.out {
        Some(p) => std::fs::write(p, table).map_err(Error::from)?,
        None => { let _ = std::io::stdout().write_all(table.as_bytes()); },
    }
    Ok(())
}

fn read_weights(path: &Path, n: usize) -> graphsparse::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let w: Vec<f64> = text
        .split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|_| Error::Domain(format!("bad weight {s:?}"))))
        .collect::<graphsparse::Result<_>>()?;
    if w.len() != n {
        return Err(Error::Domain(format!("{} weights for {n} graphs", w.len())));
    }
    Ok(w)
}

fn cmd_mine(a: MineArgs) -> CmdResult {
    let data = GraphDataset::load(&a.data)?;
    let w = match &a.weights {
        Some(p) => read_weights(p, data.len())?,
        None => vec![1.0; data.len()],
    };
    let opts = SearchOptions {
        max_edges: a.max_edges,
        prune: !a.exhaustive,
    };
    let best = match a.search {
        SearchKind::Gain => {
            let y: Vec<f64> = data.labels.iter().map(|&l| if l > 0.0 { 1.0 } else { -1.0 }).collect();
            best_gain_feature_with(&data, &w, &y, &opts)?
        }
        SearchKind::Error => best_error_feature_with(&data, &w, &data.labels, &opts)?,
        SearchKind::Correlation => best_correlation_feature_with(&data, &w, &opts)?,
    };
    out!("value {}", best.value);
    out!("visited {}", best.visited);
    out!("pattern {}", best.code);
    Ok(())
}

fn cmd_export(a: ExportArgs) -> CmdResult {
    let data = GraphDataset::load(&a.data)?;
    let matrix = build_design_matrix(&data, a.max_edges)?;
    std::fs::write(&a.out, matrix.export(&data.labels)?).map_err(Error::from)?;
    out!("wrote {} columns for {} graphs", matrix.columns.len(), data.len());
    Ok(())
}
