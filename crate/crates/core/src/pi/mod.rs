//! Peer-influence constructions.
//!
//! The influence matrix is stored rows-as-influencers: entry `[i][j]` is
//! how much feature `j`'s attribution drops when feature `i` is nullified,
//! `phi[j] - phi_without_i[j]`. Row `i` therefore lists the influence of
//! feature `i` on every other feature; the diagonal is fixed at zero.

mod alter;
mod graph;
mod pearson;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use alter::{
    alt, calt, conflict_matrix, AlterationKind, AlterationResult, ConflictMatrix, ZeroPolicy,
};
pub use graph::{pi_graph, PiGraph};
pub use pearson::pearson_matrix;

use crate::data::{nullify_instance, reduce_dataset_with, Dataset, Instance};
use crate::error::{Error, Result};
use crate::explain::{explain, Attribution, ExplainerConfig};
use crate::model::Predictor;

/// Tag naming the stored matrix orientation.
pub const ORIENTATION: &str = "rows-influence-columns";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiExplanation {
    pub feature_names: Vec<String>,
    /// `m x m`, rows are the nullified (influencing) features.
    pub matrix: Vec<Vec<f64>>,
    pub baseline: Attribution,
    /// `reduced[i]` explains the instance with feature `i` nullified.
    pub reduced: Vec<Attribution>,
}

impl PiExplanation {
    /// Builds the matrix from a baseline and the `m` reduced attributions.
    pub fn from_attributions(
        feature_names: Vec<String>,
        baseline: Attribution,
        reduced: Vec<Attribution>,
    ) -> Result<Self> {
        let m = feature_names.len();
        if baseline.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: baseline.len(),
            });
        }
        if reduced.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: reduced.len(),
            });
        }
        if let Some(r) = reduced.iter().find(|r| r.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: r.len(),
            });
        }
        let matrix = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            0.0
                        } else {
                            baseline.phi[j] - reduced[i].phi[j]
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            feature_names,
            matrix,
            baseline,
            reduced,
        })
    }

    /// Wraps an influence matrix computed elsewhere (for example a
    /// hand-entered table) together with its baseline attributions. The
    /// reduced attributions are back-filled so the consistency invariant
    /// holds; their diagonal entries are zero.
    pub fn from_influence_matrix(
        feature_names: Vec<String>,
        phi: Vec<f64>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = feature_names.len();
        if phi.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: phi.len(),
            });
        }
        check_square(&matrix, m)?;
        for (i, row) in matrix.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::Consistency(alloc::format!(
                    "diagonal entry {} is {}, expected 0",
                    i,
                    row[i]
                )));
            }
        }
        let reduced = (0..m)
            .map(|i| {
                let p = (0..m)
                    .map(|j| if i == j { 0.0 } else { phi[j] - matrix[i][j] })
                    .collect();
                Attribution::provided(p)
            })
            .collect();
        Ok(Self {
            feature_names,
            matrix,
            baseline: Attribution::provided(phi),
            reduced,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Transpose: entry `[i][j]` is the change in feature `i`'s
    /// attribution when feature `j` is nullified.
    pub fn column_oriented(&self) -> Vec<Vec<f64>> {
        let m = self.n_features();
        (0..m)
            .map(|i| (0..m).map(|j| self.matrix[j][i]).collect())
            .collect()
    }

    /// Largest deviation between the stored matrix and the one implied by
    /// the stored attributions.
    pub fn consistency_gap(&self) -> f64 {
        let m = self.n_features();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let expect = if i == j {
                    0.0
                } else {
                    self.baseline.phi[j] - self.reduced[i].phi[j]
                };
                worst = worst.max(libm::fabs(self.matrix[i][j] - expect));
            }
        }
        worst
    }

    /// Every attribution (baseline and reduced) multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::from_attributions(
            self.feature_names.clone(),
            self.baseline.scaled(k),
            self.reduced.iter().map(|a| a.scaled(k)).collect(),
        )
    }
}

pub(crate) fn check_square(matrix: &[Vec<f64>], m: usize) -> Result<()> {
    if matrix.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: matrix.len(),
        });
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: row.len(),
        });
    }
    Ok(())
}

/// Peer-influence explanation of `x` under model `f`.
///
/// Runs one baseline explanation and, for every feature `j`, one
/// explanation of the instance with `x[j]` replaced by the background mean
/// of feature `j`, against the background with column `j` likewise
/// replaced. The model is never refit.
pub fn pi_explanation<P: Predictor + ?Sized>(
    f: &P,
    config: &ExplainerConfig,
    background: &Dataset,
    x: &Instance,
) -> Result<PiExplanation> {
    let means = (0..background.n_features())
        .map(|j| background.column_mean(j))
        .collect::<Result<Vec<_>>>()?;
    pi_explanation_with_means(f, config, background, x, &means)
}

/// As [`pi_explanation`], with the per-feature replacement values supplied
/// by the caller (for instance means over the full dataset rather than the
/// background).
pub fn pi_explanation_with_means<P: Predictor + ?Sized>(
    f: &P,
    config: &ExplainerConfig,
    background: &Dataset,
    x: &Instance,
    means: &[f64],
) -> Result<PiExplanation> {
    x.validate(background.schema())?;
    let m = background.n_features();
    if means.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: means.len(),
        });
    }
    let baseline = explain(f, background, x, config)?;
    let mut reduced = Vec::with_capacity(m);
    for (j, &mean) in means.iter().enumerate() {
        let wrap = |e: Error| Error::Explainer {
            feature: j,
            source: alloc::boxed::Box::new(e),
        };
        let rd = reduce_dataset_with(background, j, mean).map_err(wrap)?;
        let xj = nullify_instance(x, j, mean).map_err(wrap)?;
        reduced.push(explain(f, &rd.materialize(), &xj, config).map_err(wrap)?);
    }
    PiExplanation::from_attributions(background.feature_names(), baseline, reduced)
}
