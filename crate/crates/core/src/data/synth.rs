//! Seeded stand-in for a lung-cancer cohort with seven features.
//!
//! Features are drawn independently. The label follows a logistic
//! mechanism on standardized features:
//!
//! ```text
//! P(label = 1 | x) = sigmoid(intercept + sum_k coef_k * (x_k - mu_k) / sd_k)
//! ```
//!
//! where `mu_k`, `sd_k` are the population moments of each feature's
//! sampling distribution (not sample moments). Label 1 reads as "survives
//! beyond six months". With the default coefficients metastasis, nodal
//! and tumour stage, and age push towards 0; weight and dose push towards
//! 1; height is inert.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::schema::FeatureSchema;
use crate::error::{Error, Result};

/// Sampling distribution of one synthetic feature.
#[derive(Debug, Clone, Copy)]
pub enum FeatureSpec {
    /// Uniform on `[lo, hi]`, rounded to a multiple of `step`.
    Uniform { lo: f64, hi: f64, step: f64 },
    /// Normal, clipped to `[lo, hi]` and rounded to a multiple of `step`.
    Normal {
        mean: f64,
        sd: f64,
        lo: f64,
        hi: f64,
        step: f64,
    },
    /// Uniform over `k` category codes.
    Categories { k: usize },
}

impl FeatureSpec {
    fn moments(&self) -> (f64, f64) {
        match *self {
            FeatureSpec::Uniform { lo, hi, .. } => ((lo + hi) / 2.0, (hi - lo) / libm::sqrt(12.0)),
            FeatureSpec::Normal { mean, sd, .. } => (mean, sd),
            FeatureSpec::Categories { k } => {
                let k = k as f64;
                ((k - 1.0) / 2.0, libm::sqrt((k * k - 1.0) / 12.0))
            }
        }
    }
}

/// Name, schema and sampling distribution of the seven generated columns.
pub const SYNTHETIC_FEATURES: [(&str, FeatureSpec); 7] = [
    (
        "Dose Administration",
        FeatureSpec::Uniform {
            lo: 50.0,
            hi: 1000.0,
            step: 10.0,
        },
    ),
    ("M Best", FeatureSpec::Categories { k: 4 }),
    ("N Best", FeatureSpec::Categories { k: 4 }),
    ("T Best", FeatureSpec::Categories { k: 4 }),
    (
        "Weight",
        FeatureSpec::Normal {
            mean: 72.0,
            sd: 14.0,
            lo: 35.0,
            hi: 150.0,
            step: 0.1,
        },
    ),
    (
        "Age",
        FeatureSpec::Normal {
            mean: 68.0,
            sd: 10.0,
            lo: 18.0,
            hi: 100.0,
            step: 1.0,
        },
    ),
    (
        "Height",
        FeatureSpec::Normal {
            mean: 1.70,
            sd: 0.09,
            lo: 1.40,
            hi: 2.05,
            step: 0.01,
        },
    ),
];

fn synthetic_schema() -> Vec<FeatureSchema> {
    alloc::vec![
        FeatureSchema::numerical("Dose Administration")
            .controllable(true)
            .with_unit("mg"),
        FeatureSchema::categorical("M Best", ["0", "1", "1a", "1b"]),
        FeatureSchema::categorical("N Best", ["0", "1", "2", "3"]),
        FeatureSchema::categorical("T Best", ["1", "2", "3", "4"]),
        FeatureSchema::numerical("Weight")
            .controllable(true)
            .with_unit("kg"),
        FeatureSchema::numerical("Age").with_unit("years"),
        FeatureSchema::numerical("Height").with_unit("m"),
    ]
}

/// Generator settings. `coefficients` is keyed by feature name; features
/// not listed get a zero coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub intercept: f64,
    #[serde(default = "default_coefficients")]
    pub coefficients: BTreeMap<String, f64>,
}

fn default_coefficients() -> BTreeMap<String, f64> {
    [
        ("Dose Administration", 1.5),
        ("M Best", -4.0),
        ("N Best", -2.0),
        ("T Best", -2.5),
        ("Weight", 3.5),
        ("Age", -2.5),
        ("Height", 0.0),
    ]
    .into_iter()
    .map(|(k, v)| (String::from(k), v))
    .collect()
}

impl GeneratorConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            intercept: 0.0,
            coefficients: default_coefficients(),
        }
    }

    pub fn with_coefficient(mut self, name: &str, value: f64) -> Self {
        self.coefficients.insert(String::from(name), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::InvalidArgument(format!(
                "synthetic dataset needs n >= 10, got {}",
                self.n
            )));
        }
        if !self.intercept.is_finite() {
            return Err(Error::InvalidArgument("intercept must be finite".into()));
        }
        for (name, c) in &self.coefficients {
            if !SYNTHETIC_FEATURES.iter().any(|(f, _)| f == name) {
                return Err(Error::InvalidArgument(format!(
                    "coefficient for unknown feature `{}`",
                    name
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "coefficient for `{}` must be finite",
                    name
                )));
            }
        }
        Ok(())
    }

    /// Ground-truth log-odds of label 1 for an encoded row.
    pub fn logit(&self, row: &[f64]) -> f64 {
        let mut z = self.intercept;
        for ((name, spec), &v) in SYNTHETIC_FEATURES.iter().zip(row) {
            let c = self.coefficients.get(*name).copied().unwrap_or(0.0);
            let (mu, sd) = spec.moments();
            z += c * (v - mu) / sd;
        }
        z
    }
}

fn round_to(v: f64, step: f64) -> f64 {
    // keep rounded values short in decimal form
    let k = libm::round(v / step);
    if step >= 1.0 {
        k * step
    } else {
        k / libm::round(1.0 / step)
    }
}

fn draw(spec: FeatureSpec, rng: &mut ChaCha8Rng) -> f64 {
    match spec {
        FeatureSpec::Uniform { lo, hi, step } => {
            let u = Uniform::new_inclusive(lo, hi).expect("valid bounds");
            round_to(u.sample(rng), step)
        }
        FeatureSpec::Normal {
            mean,
            sd,
            lo,
            hi,
            step,
        } => {
            let d = Normal::new(mean, sd).expect("valid sd");
            round_to(d.sample(rng).clamp(lo, hi), step)
        }
        FeatureSpec::Categories { k } => rng.random_range(0..k) as f64,
    }
}

pub fn generate_synthetic(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = SYNTHETIC_FEATURES.len();
    let mut values = Vec::with_capacity(config.n * m);
    let mut labels = Vec::with_capacity(config.n);
    let mut row = [0.0f64; 7];
    for _ in 0..config.n {
        for (slot, (_, spec)) in row.iter_mut().zip(SYNTHETIC_FEATURES.iter()) {
            *slot = draw(*spec, &mut rng);
        }
        let p = 1.0 / (1.0 + libm::exp(-config.logit(&row)));
        let u: f64 = rng.random();
        labels.push(u8::from(u < p));
        values.extend_from_slice(&row);
    }
    Dataset::from_row_major(synthetic_schema(), values, labels)
}
