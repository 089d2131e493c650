use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Pairwise Pearson correlation of the dataset's columns.
///
/// A global diagnostic, unrelated to any single prediction. The result is
/// exactly symmetric with a unit diagonal.
pub fn pearson_matrix(d: &Dataset) -> Result<Vec<Vec<f64>>> {
    let m = d.n_features();
    let n = d.n_rows() as f64;
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let c = d.column(j);
            let mean = c.iter().sum::<f64>() / n;
            c.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| libm::sqrt(c.iter().map(|v| v * v).sum()))
        .collect();
    for (j, &nrm) in norms.iter().enumerate() {
        if nrm == 0.0 {
            return Err(Error::DegenerateColumn {
                feature: d.schema()[j].name.clone(),
            });
        }
    }
    let mut out = alloc::vec![alloc::vec![0.0; m]; m];
    for i in 0..m {
        out[i][i] = 1.0;
        for j in i + 1..m {
            let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}
