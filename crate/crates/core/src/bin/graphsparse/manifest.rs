//! Per-run manifest written next to every command's outputs.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use graphsparse::{Error, Result, TraceRow};
use serde::Serialize;
use serde_json::Value;

#[derive(Serialize)]
pub struct ManifestRow {
    pub iter: usize,
    pub objective: f64,
    pub train_error: f64,
    pub n_features: usize,
    pub visited: usize,
    pub pruned: usize,
    pub skipped: usize,
    pub alpha: f64,
    pub hd_inf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_error: Option<f64>,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_seconds: f64,
    pub trace: Vec<ManifestRow>,
    pub extra: Value,
    #[serde(skip)]
    start: Option<Instant>,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, start: Instant) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
            .saturating_sub(start.elapsed().as_secs());
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            threads: graphsparse::threads::worker_count(),
            started_unix,
            wall_seconds: 0.0,
            trace: Vec::new(),
            extra: Value::Null,
            start: Some(start),
        }
    }

    pub fn set_trace(&mut self, rows: &[TraceRow]) {
        self.trace = rows
            .iter()
            .map(|r| ManifestRow {
                iter: r.iter,
                objective: r.objective,
                train_error: r.train_error,
                n_features: r.n_features,
                visited: r.visited,
                pruned: r.pruned,
                skipped: r.skipped,
                alpha: r.alpha,
                hd_inf: r.hd_inf,
                test_error: r.test_error,
            })
            .collect();
    }

    pub fn write(&mut self, path: &Path) -> Result<()> {
        if let Some(s) = self.start {
            self.wall_seconds = s.elapsed().as_secs_f64();
        }
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(format!("manifest: {e}")))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
