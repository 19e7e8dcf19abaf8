//! Twice-differentiable losses `L(y, mu)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub trait Loss: Send + Sync {
    fn name(&self) -> &'static str;
    fn value(&self, y: f64, mu: f64) -> f64;
    /// `dL/dmu`.
    fn d1(&self, y: f64, mu: f64) -> f64;
    /// `d2L/dmu2`, never negative.
    fn d2(&self, y: f64, mu: f64) -> f64;
    /// Rejects labels outside the loss domain.
    fn check_label(&self, y: f64) -> Result<()>;
    /// Training-error contribution of one sample (0 or 1 for classification).
    fn error(&self, y: f64, mu: f64) -> f64;
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `y log(1 + exp(-mu)) + (1 - y) log(1 + exp(mu))` for `y` in {0, 1}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Logistic;

impl Loss for Logistic {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn value(&self, y: f64, mu: f64) -> f64 {
        y * softplus(-mu) + (1.0 - y) * softplus(mu)
    }

    fn d1(&self, y: f64, mu: f64) -> f64 {
        sigmoid(mu) - y
    }

    fn d2(&self, _y: f64, mu: f64) -> f64 {
        sigmoid(mu) * sigmoid(-mu)
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if y == 0.0 || y == 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("logistic loss needs labels 0 or 1, got {y}")))
        }
    }

    fn error(&self, y: f64, mu: f64) -> f64 {
        let predicted = if mu > 0.0 { 1.0 } else { 0.0 };
        if predicted == y {
            0.0
        } else {
            1.0
        }
    }
}

/// `(y - mu)^2 / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Squared;

impl Loss for Squared {
    fn name(&self) -> &'static str {
        "squared"
    }

    fn value(&self, y: f64, mu: f64) -> f64 {
        0.5 * (y - mu) * (y - mu)
    }

    fn d1(&self, y: f64, mu: f64) -> f64 {
        mu - y
    }

    fn d2(&self, _y: f64, _mu: f64) -> f64 {
        1.0
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if y.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("squared loss needs finite labels, got {y}")))
        }
    }

    fn error(&self, y: f64, mu: f64) -> f64 {
        (y - mu) * (y - mu)
    }
}

/// The bundled losses, by name.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LossKind {
    #[default]
    Logistic,
    Squared,
}

impl LossKind {
    pub fn loss(self) -> &'static dyn Loss {
        match self {
            LossKind::Logistic => &Logistic,
            LossKind::Squared => &Squared,
        }
    }

    pub fn name(self) -> &'static str {
        self.loss().name()
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "squared" => Ok(LossKind::Squared),
            _ => Err(Error::Domain(format!("unknown loss {s:?}"))),
        }
    }
}
