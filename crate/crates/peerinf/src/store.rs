//! Versioned model files.
//!
//! ```json
//! {
//!   "format": "peerinf-model",
//!   "version": 1,
//!   "feature_names": ["Age", "Weight"],
//!   "split": {"train_fraction": 0.7, "seed": 7},
//!   "model": {"kind": "gbdt", "n_features": 2, "base_score": 0.1, "trees": [...]}
//! }
//! ```
//!
//! `model` is tagged by `kind` (`gbdt` or `logistic`). `split` records how
//! the training rows were drawn from the dataset so later commands can
//! rebuild the same training split for use as background; it is absent for
//! models fit on a whole file.

use std::path::Path;

use peerinf_core::{Error, Model, Predictor};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{AppError, AppResult};
use crate::io::{read_text, to_json_pretty, write_text};

pub const MODEL_FORMAT: &str = "peerinf-model";
pub const MODEL_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u64,
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
    pub model: Model,
}

impl ModelFile {
    pub fn new(model: Model, feature_names: Vec<String>, split: Option<SplitSpec>) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            feature_names,
            split,
            model,
        }
    }

    /// Structural checks that serde cannot express.
    pub fn check(&self) -> peerinf_core::Result<()> {
        match &self.model {
            Model::Gbdt(m) => m.check()?,
            Model::Logistic(m) => {
                peerinf_core::LogisticModel::new(m.weights.clone(), m.bias)?;
            }
        }
        if self.model.n_features() != self.feature_names.len() {
            return Err(Error::Consistency(format!(
                "model takes {} features but {} names are listed",
                self.model.n_features(),
                self.feature_names.len()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_json_pretty(self)
    }
}

pub fn parse_model(path: &Path, text: &str) -> AppResult<ModelFile> {
    let value: Value = serde_json::from_str(text).map_err(|e| AppError::malformed(path, e))?;
    if value.get("format").and_then(Value::as_str) != Some(MODEL_FORMAT) {
        return Err(AppError::malformed(
            path,
            format!(
                "not a model file (expected \"format\": \"{}\")",
                MODEL_FORMAT
            ),
        ));
    }
    let Some(version) = value.get("version").and_then(Value::as_u64) else {
        return Err(AppError::malformed(path, "missing integer \"version\""));
    };
    if version != MODEL_VERSION {
        return Err(AppError::Version {
            path: path.into(),
            what: "model file",
            found: version,
            expected: MODEL_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| AppError::malformed(path, e))?;
    file.check().map_err(|e| AppError::malformed(path, e))?;
    Ok(file)
}

pub fn save_model(path: &Path, file: &ModelFile) -> AppResult<()> {
    write_text(path, &file.to_json())
}

pub fn load_model(path: &Path) -> AppResult<ModelFile> {
    parse_model(path, &read_text(path)?)
}
