use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numerical,
    Categorical,
}

/// One column of a dataset.
///
/// Categorical features are stored as their ordinal code, `0..k-1`, in the
/// order the labels are declared here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    #[serde(default)]
    pub controllable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl FeatureSchema {
    pub fn numerical(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numerical,
            categories: Vec::new(),
            controllable: false,
            unit: None,
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
            controllable: false,
            unit: None,
        }
    }

    pub fn controllable(mut self, controllable: bool) -> Self {
        self.controllable = controllable;
        self
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == FeatureKind::Categorical
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Schema("feature with empty name".into()));
        }
        match self.kind {
            FeatureKind::Numerical if !self.categories.is_empty() => Err(Error::Schema(format!(
                "numerical feature `{}` declares categories",
                self.name
            ))),
            FeatureKind::Categorical if self.categories.is_empty() => Err(Error::Schema(format!(
                "categorical feature `{}` has no categories",
                self.name
            ))),
            FeatureKind::Categorical => {
                let mut seen = BTreeSet::new();
                for c in &self.categories {
                    if !seen.insert(c.as_str()) {
                        return Err(Error::Schema(format!(
                            "feature `{}`: duplicate category {:?}",
                            self.name, c
                        )));
                    }
                }
                Ok(())
            }
            FeatureKind::Numerical => Ok(()),
        }
    }

    /// Whether `value` is a legal encoded cell for this feature.
    pub fn accepts(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self.kind {
            FeatureKind::Numerical => true,
            FeatureKind::Categorical => {
                value >= 0.0
                    && value <= (self.categories.len() - 1) as f64
                    && libm::trunc(value) == value
            }
        }
    }

    /// Encodes a textual cell. Categorical cells are looked up by label.
    pub fn encode(&self, raw: &str) -> Result<f64> {
        let raw = raw.trim();
        match self.kind {
            FeatureKind::Categorical => self
                .categories
                .iter()
                .position(|c| c == raw)
                .map(|i| i as f64)
                .ok_or_else(|| Error::Encoding {
                    feature: self.name.clone(),
                    label: raw.to_string(),
                }),
            FeatureKind::Numerical => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    row: 0,
                    column: self.name.clone(),
                    value: raw.to_string(),
                }),
            },
        }
    }

    /// Inverse of [`encode`](Self::encode). Non-integral categorical codes
    /// (nullified cells) fall back to the number itself.
    pub fn decode(&self, value: f64) -> String {
        if self.is_categorical() && self.accepts(value) {
            return self.categories[value as usize].clone();
        }
        format!("{}", value)
    }
}

/// Checks a full schema: every feature valid, names unique, at least two.
pub fn validate_schema(schema: &[FeatureSchema]) -> Result<()> {
    if schema.len() < 2 {
        return Err(Error::Schema(format!(
            "need at least 2 features, got {}",
            schema.len()
        )));
    }
    let mut names = BTreeSet::new();
    for f in schema {
        f.validate()?;
        if !names.insert(f.name.as_str()) {
            return Err(Error::Schema(format!(
                "duplicate feature name `{}`",
                f.name
            )));
        }
    }
    Ok(())
}
