//! Glue shared by the command line and the service: loading a dataset with
//! its model, building instances from user input, and running the full
//! peer-influence pipeline.

use std::collections::BTreeMap;
use std::path::Path;

use peerinf_core::pi::pi_explanation_with_means;
use peerinf_core::{
    alt, calt, conflict_matrix, pi_graph, split, AlterationResult, ConflictMatrix, Dataset, Error,
    ExplainerConfig, FeatureSchema, Instance, PiExplanation, PiGraph, Predictor, ZeroPolicy,
};
use serde::{Deserialize, Serialize};

use crate::document::{emit_result_document, ResultDocument};
use crate::error::AppResult;
use crate::io::{load_csv, load_schema, SchemaFile};
use crate::store::{load_model, ModelFile};

/// A cell given by a user: an encoded number, or text (a category label or
/// a decimal number).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValue {
    Number(f64),
    Text(String),
}

impl CellValue {
    pub fn encode(&self, f: &FeatureSchema) -> peerinf_core::Result<f64> {
        match self {
            CellValue::Text(s) => f.encode(s),
            CellValue::Number(v) if f.accepts(*v) => Ok(*v),
            CellValue::Number(v) => Err(Error::Schema(format!(
                "value {} is not valid for feature `{}`",
                v, f.name
            ))),
        }
    }
}

fn feature_at(schema: &[FeatureSchema], name: &str) -> peerinf_core::Result<usize> {
    schema
        .iter()
        .position(|f| f.name == name)
        .ok_or_else(|| Error::Schema(format!("unknown feature `{}`", name)))
}

/// Encodes a full instance. Every schema feature must be given exactly once.
pub fn build_instance(
    schema: &[FeatureSchema],
    cells: &BTreeMap<String, CellValue>,
) -> peerinf_core::Result<Instance> {
    for name in cells.keys() {
        feature_at(schema, name)?;
    }
    let values = schema
        .iter()
        .map(|f| match cells.get(&f.name) {
            Some(c) => c.encode(f),
            None => Err(Error::Schema(format!("missing feature `{}`", f.name))),
        })
        .collect::<peerinf_core::Result<Vec<_>>>()?;
    Ok(Instance::new(values))
}

/// Encodes edits against `schema`, keyed by feature index.
pub fn encode_edits(
    schema: &[FeatureSchema],
    edits: &BTreeMap<String, CellValue>,
) -> peerinf_core::Result<BTreeMap<usize, f64>> {
    edits
        .iter()
        .map(|(name, cell)| {
            let j = feature_at(schema, name)?;
            Ok((j, cell.encode(&schema[j])?))
        })
        .collect()
}

/// Parses `name=value` pairs separated by commas.
pub fn parse_inline(text: &str) -> peerinf_core::Result<BTreeMap<String, CellValue>> {
    let mut out = BTreeMap::new();
    for pair in text.split(',').filter(|p| !p.trim().is_empty()) {
        let Some((name, value)) = pair.split_once('=') else {
            return Err(Error::InvalidArgument(format!(
                "expected name=value, got {:?}",
                pair
            )));
        };
        let name = name.trim().to_string();
        if out
            .insert(name.clone(), CellValue::Text(value.trim().to_string()))
            .is_some()
        {
            return Err(Error::InvalidArgument(format!(
                "feature `{}` given twice",
                name
            )));
        }
    }
    Ok(out)
}

pub fn instance_cells(schema: &[FeatureSchema], x: &Instance) -> BTreeMap<String, f64> {
    schema
        .iter()
        .zip(&x.values)
        .map(|(f, &v)| (f.name.clone(), v))
        .collect()
}

/// A dataset together with a model trained on it.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub schema: SchemaFile,
    pub data: Dataset,
    pub model: ModelFile,
}

impl Bundle {
    pub fn new(schema: SchemaFile, data: Dataset, model: ModelFile) -> AppResult<Self> {
        check_compatible(&schema, &model)?;
        Ok(Self {
            schema,
            data,
            model,
        })
    }

    pub fn load(data: &Path, schema: &Path, model: &Path) -> AppResult<Self> {
        let schema = load_schema(schema)?;
        let data = load_csv(data, &schema.features, &schema.label)?;
        let model = load_model(model)?;
        Self::new(schema, data, model)
    }

    /// Rows used as explanation background: the model's training split when
    /// recorded, else the whole dataset.
    pub fn background(&self) -> AppResult<Dataset> {
        background_for(&self.data, &self.model)
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.data.feature_names()
    }
}

pub fn check_compatible(schema: &SchemaFile, model: &ModelFile) -> AppResult<()> {
    let names: Vec<&str> = schema.features.iter().map(|f| f.name.as_str()).collect();
    if names
        != model
            .feature_names
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
    {
        return Err(Error::Schema(format!(
            "model features {:?} do not match dataset features {:?}",
            model.feature_names, names
        ))
        .into());
    }
    Ok(())
}

pub fn background_for(data: &Dataset, model: &ModelFile) -> AppResult<Dataset> {
    match model.split {
        Some(s) => Ok(split(data, s.train_fraction, s.seed)?.0),
        None => Ok(data.clone()),
    }
}

/// Where nullified features take their replacement value from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanSource {
    /// Column means of the background rows.
    #[default]
    Background,
    /// Column means of the whole dataset.
    Dataset,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PiOptions {
    #[serde(default)]
    pub zero_policy: ZeroPolicy,
    /// Feature names the alteration indices may select; `None` for all.
    #[serde(default)]
    pub controllable: Option<Vec<String>>,
    #[serde(default)]
    pub means: MeanSource,
}

pub struct PiArtifacts {
    pub explanation: PiExplanation,
    pub graph: PiGraph,
    pub conflict: ConflictMatrix,
    pub alt: AlterationResult,
    pub calt: AlterationResult,
    pub document: ResultDocument,
}

pub fn controllable_indices(
    schema: &[FeatureSchema],
    names: Option<&[String]>,
) -> peerinf_core::Result<Option<Vec<usize>>> {
    names
        .map(|names| names.iter().map(|n| feature_at(schema, n)).collect())
        .transpose()
}

/// Explanation, graph, conflict matrix, ALT/CALT and the result document.
pub fn run_pi<P: Predictor + ?Sized>(
    f: &P,
    config: &ExplainerConfig,
    data: &Dataset,
    background: &Dataset,
    x: &Instance,
    options: &PiOptions,
) -> peerinf_core::Result<PiArtifacts> {
    let mask = controllable_indices(data.schema(), options.controllable.as_deref())?;
    let source = match options.means {
        MeanSource::Background => background,
        MeanSource::Dataset => data,
    };
    let means = (0..source.n_features())
        .map(|j| source.column_mean(j))
        .collect::<peerinf_core::Result<Vec<_>>>()?;
    let explanation = pi_explanation_with_means(f, config, background, x, &means)?;
    let graph = pi_graph(&explanation);
    let conflict = conflict_matrix(&explanation, options.zero_policy);
    let alt = alt(&explanation, mask.as_deref())?;
    let calt = calt(&conflict, mask.as_deref())?;
    let document = emit_result_document(&explanation, &graph, &conflict, &alt, &calt);
    Ok(PiArtifacts {
        explanation,
        graph,
        conflict,
        alt,
        calt,
        document,
    })
}
