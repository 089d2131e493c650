//! Interventional Shapley attribution against a background dataset.
//!
//! The value of a coalition `S` is the mean model score over background
//! rows `z` of the composite input taking features in `S` from the
//! explained instance and the rest from `z`. Both backends explain the raw
//! (log-odds) score.

mod exact;
mod sampled;
mod value;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use exact::shapley_exact;
pub use sampled::shapley_sampled;

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::model::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Sampled,
    /// Attributions supplied from outside (fixtures, other explainers).
    Provided,
}

/// Per-feature contributions to one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub phi: Vec<f64>,
    /// Mean background score, the value of the empty coalition.
    pub base_value: f64,
    /// Score of the explained instance.
    pub target_score: f64,
    pub backend: Backend,
    #[serde(default)]
    pub background_digest: String,
    /// Monte-Carlo standard error per feature (sampled backend only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Attribution {
    /// Attributions from an external source; `base_value` is zero and the
    /// target is the sum of `phi`.
    pub fn provided(phi: Vec<f64>) -> Self {
        let target_score = phi.iter().sum();
        Self {
            phi,
            base_value: 0.0,
            target_score,
            backend: Backend::Provided,
            background_digest: String::new(),
            standard_errors: None,
            seed: None,
        }
    }

    /// `|base_value + sum(phi) - target_score|`.
    pub fn efficiency_gap(&self) -> f64 {
        libm::fabs(self.base_value + self.phi.iter().sum::<f64>() - self.target_score)
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Multiplies every contribution, the base value and the target by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.phi.iter_mut().for_each(|p| *p *= k);
        out.base_value *= k;
        out.target_score *= k;
        if let Some(se) = out.standard_errors.as_mut() {
            se.iter_mut().for_each(|s| *s *= libm::fabs(k));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerConfig {
    pub backend: Backend,
    /// Background rows kept after seeded subsampling.
    pub background_rows: usize,
    pub seed: u64,
    /// Permutation count for the sampled backend.
    pub permutations: usize,
    /// Largest feature count the exact backend accepts.
    pub max_exact_features: usize,
}

/// Hard ceiling on exact enumeration, regardless of configuration.
pub const EXACT_FEATURE_CEILING: usize = 24;

impl Default for ExplainerConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Exact,
            background_rows: 100,
            seed: 0,
            permutations: 1000,
            max_exact_features: 15,
        }
    }
}

impl ExplainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.background_rows == 0 {
            return Err(Error::InvalidArgument(
                "background_rows must be >= 1".into(),
            ));
        }
        if self.permutations == 0 {
            return Err(Error::InvalidArgument("permutations must be >= 1".into()));
        }
        if self.max_exact_features > EXACT_FEATURE_CEILING {
            return Err(Error::InvalidArgument(alloc::format!(
                "max_exact_features above {} is not supported",
                EXACT_FEATURE_CEILING
            )));
        }
        if self.backend == Backend::Provided {
            return Err(Error::InvalidArgument(
                "the provided backend cannot compute attributions".into(),
            ));
        }
        Ok(())
    }
}

fn check_shapes<P: Predictor + ?Sized>(f: &P, background: &Dataset, x: &Instance) -> Result<()> {
    let m = background.n_features();
    if x.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: x.len(),
        });
    }
    if f.n_features() != m {
        return Err(Error::Consistency(alloc::format!(
            "model expects {} features, background has {}",
            f.n_features(),
            m
        )));
    }
    Ok(())
}

/// Subsamples the background with the configured seed and dispatches to
/// the configured backend.
pub fn explain<P: Predictor + ?Sized>(
    f: &P,
    background: &Dataset,
    x: &Instance,
    config: &ExplainerConfig,
) -> Result<Attribution> {
    config.validate()?;
    check_shapes(f, background, x)?;
    let bg = background.subsample(config.background_rows, config.seed);
    match config.backend {
        Backend::Exact => {
            let mut a = shapley_exact(f, &bg, x, config.max_exact_features)?;
            a.seed = Some(config.seed);
            Ok(a)
        }
        Backend::Sampled => shapley_sampled(f, &bg, x, config.permutations, config.seed),
        Backend::Provided => unreachable!("rejected by validate"),
    }
}
