use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::PiExplanation;
use crate::error::{Error, Result};

/// How an exactly-zero influence maps into the conflict matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroPolicy {
    /// `+1` only for strictly positive entries; zero maps to `-1`.
    #[default]
    Strict,
    /// Zero maps to `+1`.
    Inclusive,
}

/// Elementwise sign of an influence matrix, entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictMatrix {
    pub matrix: Vec<Vec<i8>>,
    pub zero_policy: ZeroPolicy,
}

impl ConflictMatrix {
    pub fn n_features(&self) -> usize {
        self.matrix.len()
    }

    pub fn row_sums(&self) -> Vec<i64> {
        self.matrix
            .iter()
            .map(|r| r.iter().map(|&c| c as i64).sum())
            .collect()
    }
}

pub fn conflict_matrix(e: &PiExplanation, zero_policy: ZeroPolicy) -> ConflictMatrix {
    let sign = |v: f64| -> i8 {
        let positive = match zero_policy {
            ZeroPolicy::Strict => v > 0.0,
            ZeroPolicy::Inclusive => v >= 0.0,
        };
        if positive {
            1
        } else {
            -1
        }
    };
    ConflictMatrix {
        matrix: e
            .matrix
            .iter()
            .map(|row| row.iter().map(|&v| sign(v)).collect())
            .collect(),
        zero_policy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlterationKind {
    /// Row sums of the influence matrix.
    Alt,
    /// Row sums of the conflict matrix.
    Calt,
}

/// Row sums and their argmin set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlterationResult {
    pub kind: AlterationKind,
    /// Sum over every column of each row, for all features.
    pub row_sums: Vec<f64>,
    /// Every feature attaining the minimum among the candidates, ascending.
    pub selected: Vec<usize>,
    /// Candidate features, when restricted to a controllable subset.
    pub restricted_to: Option<Vec<usize>>,
}

impl AlterationResult {
    pub fn is_candidate(&self, i: usize) -> bool {
        self.restricted_to
            .as_ref()
            .is_none_or(|mask| mask.binary_search(&i).is_ok())
    }

    pub fn is_selected(&self, i: usize) -> bool {
        self.selected.binary_search(&i).is_ok()
    }
}

fn normalize_mask(mask: Option<&[usize]>, m: usize) -> Result<Option<Vec<usize>>> {
    let Some(mask) = mask else {
        return Ok(None);
    };
    if mask.is_empty() {
        return Err(Error::InvalidArgument("controllable mask is empty".into()));
    }
    if let Some(&bad) = mask.iter().find(|&&i| i >= m) {
        return Err(Error::IndexOutOfRange { index: bad, len: m });
    }
    let mut v = mask.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(Some(v))
}

fn argmin_rows(
    kind: AlterationKind,
    row_sums: Vec<f64>,
    mask: Option<&[usize]>,
) -> Result<AlterationResult> {
    let m = row_sums.len();
    let restricted_to = normalize_mask(mask, m)?;
    let candidates: Vec<usize> = match &restricted_to {
        Some(v) => v.clone(),
        None => (0..m).collect(),
    };
    let min = candidates
        .iter()
        .map(|&i| row_sums[i])
        .fold(f64::INFINITY, f64::min);
    let selected = candidates
        .into_iter()
        .filter(|&i| row_sums[i] == min)
        .collect();
    Ok(AlterationResult {
        kind,
        row_sums,
        selected,
        restricted_to,
    })
}

/// Features whose influence row has the smallest total.
pub fn alt(e: &PiExplanation, controllable: Option<&[usize]>) -> Result<AlterationResult> {
    let row_sums = e.matrix.iter().map(|r| r.iter().sum()).collect();
    argmin_rows(AlterationKind::Alt, row_sums, controllable)
}

/// Features whose conflict row has the smallest total.
pub fn calt(c: &ConflictMatrix, controllable: Option<&[usize]>) -> Result<AlterationResult> {
    let row_sums = c.row_sums().into_iter().map(|s| s as f64).collect();
    argmin_rows(AlterationKind::Calt, row_sums, controllable)
}
