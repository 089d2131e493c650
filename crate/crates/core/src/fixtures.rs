//! Two worked examples (five and seven features) from a drug-dosing study.
//!
//! Matrices are stored to two decimals. Row order follows the labels of
//! the matching alteration tables, and the baseline attributions are
//! re-ordered to match.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::pi::PiExplanation;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn rows<const M: usize>(m: [[f64; M]; M]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// Five-feature running example.
pub fn case1_names() -> Vec<String> {
    names(&["Age", "Weight", "Height", "N Best", "M Best"])
}

/// Attributions of the five-feature instance, in [`case1_names`] order.
pub const CASE1_PHI: [f64; 5] = [1.71, -0.65, 1.88, -0.01, 3.24];

pub const CASE1_MATRIX: [[f64; 5]; 5] = [
    [0.0, -2.92, 2.38, -0.88, 4.18],
    [1.68, 0.0, 1.85, -1.30, 2.97],
    [2.31, -2.25, 0.0, -2.04, 3.55],
    [1.82, -2.60, 1.41, 0.0, 3.66],
    [1.78, -2.08, 0.66, -0.77, 0.0],
];

/// The same instance in its original table order with feature values.
pub const CASE1_INSTANCE: [(&str, &str, f64); 5] = [
    ("M Best", "1b", 3.24),
    ("N Best", "0", -0.01),
    ("Weight", "67", -0.65),
    ("Age", "65", 1.71),
    ("Height", "1.78", 1.88),
];

pub fn case1() -> PiExplanation {
    PiExplanation::from_influence_matrix(case1_names(), CASE1_PHI.to_vec(), rows(CASE1_MATRIX))
        .expect("fixture is well formed")
}

/// Seven-feature example (drug cycle 2).
pub fn case2_names() -> Vec<String> {
    names(&[
        "Age",
        "Weight",
        "Height",
        "Dose Administration",
        "T Best",
        "N Best",
        "M Best",
    ])
}

/// Cycle-2 attributions in [`case2_names`] order.
pub const CASE2_PHI: [f64; 7] = [-0.01, 3.09, 0.63, -0.09, -0.14, 1.10, 1.52];

pub const CASE2_MATRIX: [[f64; 7]; 7] = [
    [0.0, 2.01, 1.03, -0.08, -0.86, -0.65, 1.52],
    [-0.53, 0.0, 0.70, -0.38, -1.37, -0.44, 1.54],
    [-0.24, -0.51, 0.0, -0.27, -0.64, 0.26, 1.54],
    [-0.07, -0.23, -0.37, 0.0, -0.89, 0.31, 1.53],
    [0.24, -0.16, -0.73, -0.30, 0.0, 0.06, 1.52],
    [0.08, -0.52, 0.46, 0.19, -0.39, 0.0, 1.53],
    [-0.80, -0.25, 0.36, -0.03, -0.42, 0.03, 0.0],
];

pub fn case2() -> PiExplanation {
    PiExplanation::from_influence_matrix(case2_names(), CASE2_PHI.to_vec(), rows(CASE2_MATRIX))
        .expect("fixture is well formed")
}
