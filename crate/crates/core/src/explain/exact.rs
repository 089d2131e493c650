use alloc::vec::Vec;

use super::value::CoalitionValue;
use super::{check_shapes, Attribution, Backend};
use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::model::Predictor;

/// `|S|! (m - |S| - 1)! / m!` indexed by `|S|`.
fn coalition_weights(m: usize) -> Vec<f64> {
    // 1 / (m * C(m-1, s))
    let mut out = Vec::with_capacity(m);
    let mut binom = 1.0f64;
    for s in 0..m {
        out.push(1.0 / (m as f64 * binom));
        binom = binom * (m - 1 - s) as f64 / (s + 1) as f64;
    }
    out
}

/// Exact interventional Shapley values by enumerating all `2^m` coalitions.
///
/// Every coalition value is computed once; contributions are accumulated
/// in increasing coalition-index order, so the result does not depend on
/// any evaluation schedule.
pub fn shapley_exact<P: Predictor + ?Sized>(
    f: &P,
    background: &Dataset,
    x: &Instance,
    max_features: usize,
) -> Result<Attribution> {
    check_shapes(f, background, x)?;
    let m = x.len();
    let limit = max_features.min(super::EXACT_FEATURE_CEILING);
    if m > limit {
        return Err(Error::Capacity { features: m, limit });
    }
    let mut vf = CoalitionValue::new(f, background, &x.values);
    let n_coalitions = 1usize << m;
    let values: Vec<f64> = (0..n_coalitions)
        .map(|mask| vf.value(|i| mask >> i & 1 == 1))
        .collect();
    let weights = coalition_weights(m);

    let mut phi = alloc::vec![0.0; m];
    for mask in 0..n_coalitions {
        let w = weights
            .get(mask.count_ones() as usize)
            .copied()
            .unwrap_or(0.0);
        for (i, p) in phi.iter_mut().enumerate() {
            let bit = 1usize << i;
            if mask & bit == 0 {
                *p += w * (values[mask | bit] - values[mask]);
            }
        }
    }

    Ok(Attribution {
        phi,
        base_value: values[0],
        target_score: vf.target(),
        backend: Backend::Exact,
        background_digest: background.digest(),
        standard_errors: None,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::coalition_weights;

    #[test]
    fn weights_sum_to_one_over_subsets() {
        // sum_s C(m-1, s) * w(s) = 1
        for m in 1..12usize {
            let w = coalition_weights(m);
            let mut binom = 1.0;
            let mut total = 0.0;
            for s in 0..m {
                total += binom * w[s];
                binom = binom * (m - 1 - s) as f64 / (s + 1) as f64;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert_eq!(coalition_weights(3), [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0]);
    }
}
