use std::fmt::Write as _;

use super::model::SparseModel;
use crate::dfs::DfsCode;
use crate::error::{Error, Result};

/// Coefficients after an iteration and the patterns whose update was nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub intercept: f64,
    /// Sorted by code.
    pub coefficients: Vec<(DfsCode, f64)>,
    /// Sorted by code.
    pub t_nonzero: Vec<DfsCode>,
}

/// One iteration. `objective`, `train_error` and `n_features` describe the
/// iterate after the step.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub train_error: f64,
    pub n_features: usize,
    pub visited: usize,
    pub pruned: usize,
    pub skipped: usize,
    pub alpha: f64,
    pub hd_inf: f64,
    pub test_error: Option<f64>,
    pub snapshot: Option<Snapshot>,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub model: SparseModel,
    pub trace: Vec<TraceRow>,
    /// `F` at the all-zero start.
    pub initial_objective: f64,
    pub converged: bool,
    /// `mu` on the training graphs at the final iterate.
    pub train_mu: Vec<f64>,
}

const HEADER: &str = "iter,objective,train_error,n_features,visited,pruned,skipped,alpha,hd_inf";

pub fn write_trace_csv(rows: &[TraceRow]) -> String {
    let with_test = rows.iter().any(|r| r.test_error.is_some());
    let mut out = String::from(HEADER);
    if with_test {
        out.push_str(",test_error");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.iter, r.objective, r.train_error, r.n_features, r.visited, r.pruned, r.skipped, r.alpha, r.hd_inf
        );
        if with_test {
            match r.test_error {
                Some(e) => {
                    let _ = write!(out, ",{e}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Reads a trace written by [`write_trace_csv`]. Snapshots are not stored.
pub fn read_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty trace"))?;
    let columns: Vec<&str> = header.trim().split(',').collect();
    let with_test = match columns.as_slice() {
        c if c.join(",") == HEADER => false,
        c if c.len() == 10 && c[..9].join(",") == HEADER && c[9] == "test_error" => true,
        _ => return Err(Error::parse(1, format!("unexpected trace header {header:?}"))),
    };
    let mut rows = Vec::new();
    for (k, line) in lines {
        let ln = k + 1;
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != columns.len() {
            return Err(Error::parse(ln, format!("expected {} fields, found {}", columns.len(), f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(ln, format!("bad integer {s:?}")));
        let real = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(ln, format!("bad number {s:?}")));
        rows.push(TraceRow {
            iter: int(f[0])?,
            objective: real(f[1])?,
            train_error: real(f[2])?,
            n_features: int(f[3])?,
            visited: int(f[4])?,
            pruned: int(f[5])?,
            skipped: int(f[6])?,
            alpha: real(f[7])?,
            hd_inf: real(f[8])?,
            test_error: if with_test && !f[9].is_empty() { Some(real(f[9])?) } else { None },
            snapshot: None,
        });
    }
    Ok(rows)
}
