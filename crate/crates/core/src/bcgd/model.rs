use std::fmt::Write as _;
use std::path::Path;

use crate::contains::contains;
use crate::dfs::DfsCode;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

const MAGIC: &str = "graphsparse-model";

#[derive(Clone, Debug, PartialEq)]
pub struct Feature {
    pub code: DfsCode,
    pub coef: f64,
    /// Number of training graphs containing the pattern.
    pub support: usize,
}

/// `mu(g) = intercept + sum_j coef_j I(code_j in g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseModel {
    pub intercept: f64,
    /// Sorted by code; no coefficient is zero.
    pub features: Vec<Feature>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub loss: String,
    /// Number of training graphs.
    pub n: usize,
}

impl SparseModel {
    pub fn intercept_only(intercept: f64, loss: &str) -> Self {
        SparseModel {
            intercept,
            features: Vec::new(),
            lambda1: 0.0,
            lambda2: 0.0,
            loss: loss.to_string(),
            n: 0,
        }
    }

    pub fn coefficient(&self, code: &DfsCode) -> Option<f64> {
        self.features.iter().find(|f| &f.code == code).map(|f| f.coef)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MAGIC} intercept={} l1={} l2={} loss={} n={}\n",
            self.intercept, self.lambda1, self.lambda2, self.loss, self.n
        );
        for f in &self.features {
            let _ = writeln!(out, "{} {} {}", f.coef, f.support, f.code);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty model file"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some(MAGIC) {
            return Err(Error::parse(1, "not a model file"));
        }
        let mut intercept = None;
        let mut l1 = None;
        let mut l2 = None;
        let mut loss = None;
        let mut n = None;
        for kv in fields {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("expected key=value, found {kv:?}")))?;
            let real = || v.parse::<f64>().map_err(|_| Error::parse(1, format!("bad value for {k}: {v:?}")));
            match k {
                "intercept" => intercept = Some(real()?),
                "l1" => l1 = Some(real()?),
                "l2" => l2 = Some(real()?),
                "loss" => loss = Some(v.to_string()),
                "n" => n = Some(v.parse::<usize>().map_err(|_| Error::parse(1, format!("bad n {v:?}")))?),
                _ => return Err(Error::parse(1, format!("unknown header field {k:?}"))),
            }
        }
        let missing = |what: &str| Error::parse(1, format!("header lacks {what}"));
        let mut model = SparseModel {
            intercept: intercept.ok_or_else(|| missing("intercept"))?,
            features: Vec::new(),
            lambda1: l1.ok_or_else(|| missing("l1"))?,
            lambda2: l2.ok_or_else(|| missing("l2"))?,
            loss: loss.ok_or_else(|| missing("loss"))?,
            n: n.ok_or_else(|| missing("n"))?,
        };
        for (k, line) in lines {
            let ln = k + 1;
            let mut parts = line.split_whitespace();
            let coef: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(ln, "bad coefficient"))?;
            let support: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(ln, "bad support count"))?;
            let code: DfsCode = parts
                .collect::<Vec<_>>()
                .join(" ")
                .parse()
                .map_err(|e| Error::parse(ln, format!("bad pattern: {e}")))?;
            if coef == 0.0 || !coef.is_finite() {
                return Err(Error::parse(ln, "coefficients must be finite and nonzero"));
            }
            model.features.push(Feature { code, coef, support });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// `mu(g)` for a graph outside the training set.
pub fn predict(model: &SparseModel, g: &LabeledGraph) -> f64 {
    let mut mu = model.intercept;
    for f in &model.features {
        if contains(g, &f.code) {
            mu += f.coef;
        }
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_code(a: u32, l: u32, b: u32) -> DfsCode {
        format!("0,1,{a},{l},{b}").parse().unwrap()
    }

    fn model() -> SparseModel {
        SparseModel {
            intercept: 1.0,
            features: vec![Feature {
                code: edge_code(0, 1, 2),
                coef: 2.0,
                support: 3,
            }],
            lambda1: 0.01,
            lambda2: 0.0,
            loss: "logistic".into(),
            n: 10,
        }
    }

    #[test]
    fn predict_is_linear() {
        let g = LabeledGraph::new(vec![0, 2, 3], vec![(0, 1, 1), (1, 2, 0)], None).unwrap();
        assert_eq!(predict(&model(), &g), 3.0);
        let h = LabeledGraph::new(vec![0, 3], vec![(0, 1, 1)], None).unwrap();
        assert_eq!(predict(&model(), &h), 1.0);
        assert_eq!(predict(&SparseModel::intercept_only(0.0, "squared"), &g), 0.0);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut m = model();
        m.intercept = 0.1 + 0.2;
        m.features[0].coef = -1.0 / 3.0;
        m.features.push(Feature {
            code: "0,1,0,0,0 1,2,0,0,1 2,0,1,0,0".parse().unwrap(),
            coef: 1e-17,
            support: 1,
        });
        let back = SparseModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(SparseModel::from_text("").is_err());
        assert!(SparseModel::from_text("model intercept=0").is_err());
        assert!(SparseModel::from_text("graphsparse-model intercept=0 l1=0 l2=0 loss=x").is_err());
        let ok = "graphsparse-model intercept=0 l1=0 l2=0 loss=x n=1\n";
        assert!(SparseModel::from_text(ok).is_ok());
        assert!(SparseModel::from_text(&format!("{ok}0 1 0,1,0,0,0\n")).is_err());
        assert!(SparseModel::from_text(&format!("{ok}1 1 0,2,0,0,0\n")).is_err());
    }
}
