//! JSON documents exchanged by the command line and the service.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so parsing a document and writing it again reproduces the input
//! byte for byte.

use peerinf_core::digest::ContentHasher;
use peerinf_core::pi::ORIENTATION;
use peerinf_core::{
    AlterationResult, Attribution, Backend, ConflictMatrix, Error, PiExplanation, PiGraph,
    ZeroPolicy,
};
use serde::{Deserialize, Serialize};

use crate::io::to_json_pretty;

pub const RESULT_FORMAT: &str = "peerinf-pi";
pub const RESULT_VERSION: u64 = 1;

/// JSON Schema (draft 2020-12) for [`ResultDocument`].
pub const RESULT_SCHEMA: &str = include_str!("../schema/pi-result.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureValue {
    pub feature: String,
    pub value: f64,
}

/// One explained prediction, contributions keyed by feature name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionDocument {
    pub phi: Vec<FeatureValue>,
    pub base_value: f64,
    pub target_score: f64,
    pub prediction: u8,
    pub backend: Backend,
    pub seed: Option<u64>,
    pub background_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<Vec<f64>>,
}

impl AttributionDocument {
    pub fn new(names: &[String], a: &Attribution) -> Self {
        Self {
            phi: names
                .iter()
                .zip(&a.phi)
                .map(|(n, &v)| FeatureValue {
                    feature: n.clone(),
                    value: v,
                })
                .collect(),
            base_value: a.base_value,
            target_score: a.target_score,
            prediction: u8::from(a.target_score >= 0.0),
            backend: a.backend,
            seed: a.seed,
            background_digest: a.background_digest.clone(),
            standard_errors: a.standard_errors.clone(),
        }
    }

    pub fn phi(&self) -> Vec<f64> {
        self.phi.iter().map(|p| p.value).collect()
    }

    pub fn to_attribution(&self) -> Attribution {
        Attribution {
            phi: self.phi(),
            base_value: self.base_value,
            target_score: self.target_score,
            backend: self.backend,
            background_digest: self.background_digest.clone(),
            standard_errors: self.standard_errors.clone(),
            seed: self.seed,
        }
    }
}

/// Short fingerprint of an attribution, stored in session history.
pub fn attribution_digest(a: &Attribution) -> String {
    let mut h = ContentHasher::new();
    h.usize(a.phi.len());
    for &p in &a.phi {
        h.f64(p);
    }
    h.f64(a.base_value)
        .f64(a.target_score)
        .str(&a.background_digest);
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub proponents: Vec<usize>,
    pub opponents: Vec<usize>,
    pub support_arcs: Vec<[usize; 2]>,
    pub attack_arcs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictSection {
    pub zero_policy: ZeroPolicy,
    pub matrix: Vec<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltSection {
    pub row_sums: Vec<f64>,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    /// Features the argmin ranged over; `null` means all of them.
    pub candidates: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaltSection {
    pub row_sums: Vec<i64>,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    pub candidates: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Masks {
    pub controllable: Option<Vec<String>>,
}

/// Full peer-influence result for one instance.
///
/// `influence[i][j]` is how much the attribution of feature `j` drops when
/// feature `i` is nullified: `baseline.phi[j] - reduced_phi[i][j]`, with a
/// zero diagonal. `orientation` names this convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format: String,
    pub version: u64,
    pub feature_names: Vec<String>,
    pub orientation: String,
    pub baseline: AttributionDocument,
    pub reduced_phi: Vec<Vec<f64>>,
    pub influence: Vec<Vec<f64>>,
    pub graph: GraphSection,
    pub conflict: ConflictSection,
    pub alt: AltSection,
    pub calt: CaltSection,
    pub masks: Masks,
}

fn names_of(names: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| names[i].clone()).collect()
}

pub fn emit_result_document(
    e: &PiExplanation,
    g: &PiGraph,
    c: &ConflictMatrix,
    alt: &AlterationResult,
    calt: &AlterationResult,
) -> ResultDocument {
    let names = &e.feature_names;
    let controllable = alt
        .restricted_to
        .as_ref()
        .or(calt.restricted_to.as_ref())
        .map(|m| names_of(names, m));
    ResultDocument {
        format: RESULT_FORMAT.into(),
        version: RESULT_VERSION,
        feature_names: names.clone(),
        orientation: ORIENTATION.into(),
        baseline: AttributionDocument::new(names, &e.baseline),
        reduced_phi: e.reduced.iter().map(|a| a.phi.clone()).collect(),
        influence: e.matrix.clone(),
        graph: GraphSection {
            proponents: g.proponents.clone(),
            opponents: g.opponents.clone(),
            support_arcs: g.support_arcs.iter().map(|&(i, j)| [i, j]).collect(),
            attack_arcs: g.attack_arcs.iter().map(|&(i, j)| [i, j]).collect(),
        },
        conflict: ConflictSection {
            zero_policy: c.zero_policy,
            matrix: c.matrix.clone(),
        },
        alt: AltSection {
            row_sums: alt.row_sums.clone(),
            selected: alt.selected.clone(),
            selected_names: names_of(names, &alt.selected),
            candidates: alt.restricted_to.clone(),
        },
        calt: CaltSection {
            row_sums: c.row_sums(),
            selected: calt.selected.clone(),
            selected_names: names_of(names, &calt.selected),
            candidates: calt.restricted_to.clone(),
        },
        masks: Masks { controllable },
    }
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        to_json_pretty(self)
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Rebuilds the explanation from the stored attributions and checks the
    /// stored matrix against it.
    pub fn to_explanation(&self) -> peerinf_core::Result<PiExplanation> {
        let m = self.feature_names.len();
        if self.reduced_phi.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: self.reduced_phi.len(),
            });
        }
        let reduced = self
            .reduced_phi
            .iter()
            .map(|phi| Attribution::provided(phi.clone()))
            .collect();
        let mut e = PiExplanation::from_attributions(
            self.feature_names.clone(),
            self.baseline.to_attribution(),
            reduced,
        )?;
        if self.influence.len() != m || self.influence.iter().any(|r| r.len() != m) {
            return Err(Error::Consistency("influence matrix is not m x m".into()));
        }
        // the stored matrix may differ from baseline - reduced by rounding
        let scale = e
            .baseline
            .phi
            .iter()
            .chain(self.influence.iter().flatten())
            .fold(1.0f64, |a, v| a.max(v.abs()));
        e.matrix = self.influence.clone();
        if e.consistency_gap() > 1e-9 * scale {
            return Err(Error::Consistency(
                "influence matrix does not match the stored attributions".into(),
            ));
        }
        Ok(e)
    }
}
