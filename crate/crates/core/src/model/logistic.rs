use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_both_classes, sigmoid, softplus, ModelKind, ModelMetadata, Predictor};
use crate::data::Dataset;
use crate::digest::ContentHasher;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// L2 penalty on weights in standardized feature space; the bias is
    /// not penalized.
    pub l2: f64,
    /// Mini-batch size; 0 means full batch.
    #[serde(default)]
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.5,
            l2: 0.0,
            batch_size: 0,
            seed: 0,
        }
    }
}

/// `score(x) = bias + sum_i weights[i] * x[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    #[serde(default)]
    pub config_digest: alloc::string::String,
}

impl LogisticModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite logistic parameters".into(),
            ));
        }
        Ok(Self {
            weights,
            bias,
            config_digest: alloc::string::String::new(),
        })
    }
}

impl Predictor for LogisticModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, values: &[f64]) -> f64 {
        let mut s = self.bias;
        for (w, x) in self.weights.iter().zip(values) {
            s += w * x;
        }
        s
    }

    fn metadata(&self) -> ModelMetadata {
        ModelMetadata {
            kind: ModelKind::Logistic,
            n_features: self.weights.len(),
            config_digest: self.config_digest.clone(),
        }
    }
}

/// Gradient descent on the mean log-loss.
///
/// Features are standardized internally and the fitted weights mapped back
/// to the raw scale, so the returned model scores raw inputs. The L2 term
/// is applied as a proximal shrink, which stays stable for any penalty.
pub fn train_logistic(train: &Dataset, config: &LogisticConfig) -> Result<LogisticModel> {
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument(
            "learning_rate must be positive".into(),
        ));
    }
    if !(config.l2 >= 0.0 && config.l2.is_finite()) {
        return Err(Error::InvalidArgument("l2 must be >= 0".into()));
    }
    check_both_classes(train)?;
    let n = train.n_rows();
    let m = train.n_features();

    let mut mu = alloc::vec![0.0; m];
    let mut sd = alloc::vec![1.0; m];
    for j in 0..m {
        let col = train.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        mu[j] = mean;
        if var > 0.0 {
            sd[j] = libm::sqrt(var);
        }
    }
    let z: Vec<f64> = train
        .rows()
        .flat_map(|r| (0..m).map(|j| (r[j] - mu[j]) / sd[j]).collect::<Vec<_>>())
        .collect();
    let y = train.labels();

    let mut w = alloc::vec![0.0; m];
    let mut b = 0.0;
    let batch = if config.batch_size == 0 {
        n
    } else {
        config.batch_size.min(n)
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shrink = 1.0 / (1.0 + config.learning_rate * config.l2);
    let mut gw = alloc::vec![0.0; m];

    for _ in 0..config.epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            gw.iter_mut().for_each(|g| *g = 0.0);
            let mut gb = 0.0;
            for &i in chunk {
                let zi = &z[i * m..(i + 1) * m];
                let s = b + w.iter().zip(zi).map(|(a, c)| a * c).sum::<f64>();
                let err = sigmoid(s) - y[i] as f64;
                for (g, c) in gw.iter_mut().zip(zi) {
                    *g += err * c;
                }
                gb += err;
            }
            let k = chunk.len() as f64;
            for (wj, g) in w.iter_mut().zip(&gw) {
                *wj = (*wj - config.learning_rate * g / k) * shrink;
            }
            b -= config.learning_rate * gb / k;
        }
        let loss: f64 = (0..n)
            .map(|i| {
                let zi = &z[i * m..(i + 1) * m];
                let s = b + w.iter().zip(zi).map(|(a, c)| a * c).sum::<f64>();
                softplus(if y[i] == 1 { -s } else { s })
            })
            .sum::<f64>()
            / n as f64;
        if !loss.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Training("logistic regression diverged".into()));
        }
    }

    let weights: Vec<f64> = w.iter().zip(&sd).map(|(wj, s)| wj / s).collect();
    let bias = b - weights.iter().zip(&mu).map(|(wj, m)| wj * m).sum::<f64>();
    let mut h = ContentHasher::new();
    h.str("logistic")
        .usize(config.epochs)
        .f64(config.learning_rate)
        .f64(config.l2)
        .usize(config.batch_size)
        .u64(config.seed);
    let mut model = LogisticModel::new(weights, bias)?;
    model.config_digest = h.finish();
    Ok(model)
}
