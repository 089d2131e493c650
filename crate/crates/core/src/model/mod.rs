//! Score-producing classifiers.
//!
//! Every model scores on the log-odds scale and predicts class 1 iff the
//! score is non-negative.

mod gbdt;
mod logistic;

use alloc::string::String;
use serde::{Deserialize, Serialize};

pub use gbdt::{train_gbdt, GbdtConfig, GbdtModel, GbdtReport, Node, RegressionTree};
pub use logistic::{train_logistic, LogisticConfig, LogisticModel};

use crate::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gbdt,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelMetadata {
    pub kind: ModelKind,
    pub n_features: usize,
    pub config_digest: String,
}

/// A pure, deterministic scoring function over encoded feature vectors.
pub trait Predictor: Send + Sync {
    fn n_features(&self) -> usize;

    /// Raw score on the log-odds scale.
    fn score(&self, values: &[f64]) -> f64;

    fn predict(&self, values: &[f64]) -> u8 {
        u8::from(self.score(values) >= 0.0)
    }

    fn metadata(&self) -> ModelMetadata;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn n_features(&self) -> usize {
        (**self).n_features()
    }
    fn score(&self, values: &[f64]) -> f64 {
        (**self).score(values)
    }
    fn metadata(&self) -> ModelMetadata {
        (**self).metadata()
    }
}

/// Any built-in model, tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Gbdt(GbdtModel),
    Logistic(LogisticModel),
}

impl Predictor for Model {
    fn n_features(&self) -> usize {
        match self {
            Model::Gbdt(m) => m.n_features(),
            Model::Logistic(m) => m.n_features(),
        }
    }

    fn score(&self, values: &[f64]) -> f64 {
        match self {
            Model::Gbdt(m) => m.score(values),
            Model::Logistic(m) => m.score(values),
        }
    }

    fn metadata(&self) -> ModelMetadata {
        match self {
            Model::Gbdt(m) => m.metadata(),
            Model::Logistic(m) => m.metadata(),
        }
    }
}

impl From<GbdtModel> for Model {
    fn from(m: GbdtModel) -> Self {
        Model::Gbdt(m)
    }
}

impl From<LogisticModel> for Model {
    fn from(m: LogisticModel) -> Self {
        Model::Logistic(m)
    }
}

/// Fraction of rows whose predicted class matches the label.
pub fn accuracy(model: &dyn Predictor, d: &Dataset) -> f64 {
    let hits = d
        .rows()
        .zip(d.labels())
        .filter(|(row, &y)| model.predict(row) == y)
        .count();
    hits as f64 / d.n_rows() as f64
}

/// Mean logistic loss of raw scores against labels.
pub fn log_loss(scores: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            // log(1 + exp(-s)) for y = 1, log(1 + exp(s)) for y = 0
            let z = if y == 1 { -s } else { s };
            softplus(z)
        })
        .sum();
    total / scores.len() as f64
}

pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

fn check_both_classes(d: &Dataset) -> crate::Result<()> {
    let pos = d.labels().iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == d.n_rows() {
        return Err(crate::Error::Training(alloc::format!(
            "training labels contain a single class ({} rows)",
            d.n_rows()
        )));
    }
    Ok(())
}
