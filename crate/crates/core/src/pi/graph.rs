use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::PiExplanation;

/// Support/attack view of an influence matrix.
///
/// Vertices split by the sign of the baseline attribution (proponent when
/// `phi >= 0`); every ordered pair `(i, j)`, `i != j`, is a support arc when
/// `E[i][j] >= 0` and an attack arc otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiGraph {
    pub feature_names: Vec<String>,
    pub proponents: Vec<usize>,
    pub opponents: Vec<usize>,
    pub support_arcs: Vec<(usize, usize)>,
    pub attack_arcs: Vec<(usize, usize)>,
}

impl PiGraph {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_proponent(&self, i: usize) -> bool {
        self.proponents.binary_search(&i).is_ok()
    }

    /// Out-arcs of `i` (its influence row), support first.
    pub fn out_arcs(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.support_arcs
            .iter()
            .chain(&self.attack_arcs)
            .copied()
            .filter(move |&(a, _)| a == i)
    }
}

pub fn pi_graph(e: &PiExplanation) -> PiGraph {
    let m = e.n_features();
    let (proponents, opponents): (Vec<usize>, Vec<usize>) =
        (0..m).partition(|&i| e.baseline.phi[i] >= 0.0);
    let mut support_arcs = Vec::new();
    let mut attack_arcs = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            if e.matrix[i][j] >= 0.0 {
                support_arcs.push((i, j));
            } else {
                attack_arcs.push((i, j));
            }
        }
    }
    PiGraph {
        feature_names: e.feature_names.clone(),
        proponents,
        opponents,
        support_arcs,
        attack_arcs,
    }
}
