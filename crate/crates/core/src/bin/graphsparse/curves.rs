//! Mean/stdev learning curves over several traces.

use graphsparse::TraceRow;

const COLUMNS: [&str; 9] = [
    "objective",
    "train_error",
    "n_features",
    "visited",
    "pruned",
    "skipped",
    "alpha",
    "hd_inf",
    "test_error",
];

fn column(r: &TraceRow, c: usize) -> Option<f64> {
    Some(match c {
        0 => r.objective,
        1 => r.train_error,
        2 => r.n_features as f64,
        3 => r.visited as f64,
        4 => r.pruned as f64,
        5 => r.skipped as f64,
        6 => r.alpha,
        7 => r.hd_inf,
        _ => return r.test_error,
    })
}

/// Row `t` is the mean and sample stdev over runs of iteration `t`; runs that
/// stopped earlier contribute their final row. Columns missing from any run
/// (test error without a test set) are dropped.
pub fn learning_curves(traces: &[Vec<TraceRow>]) -> String {
    let runs: Vec<&Vec<TraceRow>> = traces.iter().filter(|t| !t.is_empty()).collect();
    let len = runs.iter().map(|t| t.len()).max().unwrap_or(0);
    let cols: Vec<usize> = (0..COLUMNS.len())
        .filter(|&c| runs.iter().all(|t| t.iter().all(|r| column(r, c).is_some())))
        .collect();

    let mut out = String::from("iter,runs");
    for &c in &cols {
        out.push_str(&format!(",{0}_mean,{0}_std", COLUMNS[c]));
    }
    out.push('\n');
    for t in 0..len {
        out.push_str(&format!("{t},{}", runs.len()));
        for &c in &cols {
            let xs: Vec<f64> = runs
                .iter()
                .map(|run| column(&run[t.min(run.len() - 1)], c).expect("filtered"))
                .collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let std = if xs.len() > 1 {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            out.push_str(&format!(",{mean},{std}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iter: usize, objective: f64) -> TraceRow {
        TraceRow {
            iter,
            objective,
            train_error: 0.5,
            n_features: iter,
            visited: 10,
            pruned: 1,
            skipped: 0,
            alpha: 1.0,
            hd_inf: 0.1,
            test_error: None,
            snapshot: None,
        }
    }

    fn cell(table: &str, line: usize, name: &str) -> f64 {
        let mut lines = table.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let idx = header.iter().position(|h| *h == name).unwrap();
        table.lines().nth(line + 1).unwrap().split(',').nth(idx).unwrap().parse().unwrap()
    }

    #[test]
    fn single_trace_is_reproduced() {
        let t = vec![vec![row(0, 3.0), row(1, 2.0)]];
        let table = learning_curves(&t);
        assert_eq!(cell(&table, 1, "objective_mean"), 2.0);
        assert_eq!(cell(&table, 1, "objective_std"), 0.0);
        assert!(!table.contains("test_error"));
    }

    #[test]
    fn ragged_runs_carry_last_value() {
        let t = vec![vec![row(0, 4.0)], vec![row(0, 2.0), row(1, 0.0)]];
        let table = learning_curves(&t);
        assert_eq!(cell(&table, 0, "objective_mean"), 3.0);
        assert_eq!(cell(&table, 1, "objective_mean"), 2.0);
        assert!((cell(&table, 1, "objective_std") - 8f64.sqrt()).abs() < 1e-12);
    }
}
