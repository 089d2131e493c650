use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::value::CoalitionValue;
use super::{check_shapes, Attribution, Backend};
use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::model::Predictor;

/// Upper bound on cached coalition values.
const MEMO_CAPACITY: usize = 1 << 20;

/// Coalition values keyed by membership bitset. Coalitions recur across
/// permutations, so the cache removes most model calls for small `m`.
struct MemoValue<'a, P: ?Sized> {
    inner: CoalitionValue<'a, P>,
    memo: BTreeMap<Vec<u64>, f64>,
}

impl<P: Predictor + ?Sized> MemoValue<'_, P> {
    fn value(&mut self, bits: &[u64]) -> f64 {
        if let Some(&v) = self.memo.get(bits) {
            return v;
        }
        let v = self.inner.value(|i| bits[i / 64] >> (i % 64) & 1 == 1);
        if self.memo.len() < MEMO_CAPACITY {
            self.memo.insert(bits.to_vec(), v);
        }
        v
    }
}

/// Running mean and variance (Welford).
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn standard_error(&self) -> f64 {
        libm::sqrt(self.m2 / (self.n - 1.0)) / libm::sqrt(self.n)
    }
}

fn factorial(m: usize) -> Option<usize> {
    (1..=m).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// Lexicographic successor; false once `p` is the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&v| v > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Permutation-sampling Shapley estimate.
///
/// Each sampled feature order contributes the marginal gain of every
/// feature when added to the features before it. When the budget covers
/// all `m!` orders, each order is visited exactly once and the result is
/// exact (standard errors are then zero).
pub fn shapley_sampled<P: Predictor + ?Sized>(
    f: &P,
    background: &Dataset,
    x: &Instance,
    permutations: usize,
    seed: u64,
) -> Result<Attribution> {
    if permutations == 0 {
        return Err(Error::InvalidArgument("permutations must be >= 1".into()));
    }
    check_shapes(f, background, x)?;
    let m = x.len();
    let words = m.div_ceil(64);
    let mut vf = MemoValue {
        inner: CoalitionValue::new(f, background, &x.values),
        memo: BTreeMap::new(),
    };
    let empty = alloc::vec![0u64; words];
    let base_value = vf.value(&empty);

    let mut moments = alloc::vec![Moments::default(); m];
    let mut order: Vec<usize> = (0..m).collect();
    let mut bits = empty.clone();
    let mut walk = |order: &[usize], moments: &mut [Moments], vf: &mut MemoValue<'_, P>| {
        bits.copy_from_slice(&empty);
        let mut prev = base_value;
        for &i in order {
            bits[i / 64] |= 1 << (i % 64);
            let cur = vf.value(&bits);
            moments[i].push(cur - prev);
            prev = cur;
        }
    };

    let exhaustive = factorial(m).is_some_and(|total| permutations >= total);
    if exhaustive {
        loop {
            walk(&order, &mut moments, &mut vf);
            if !next_permutation(&mut order) {
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..permutations {
            order.shuffle(&mut rng);
            walk(&order, &mut moments, &mut vf);
        }
    }

    let phi = moments.iter().map(|s| s.mean).collect();
    let standard_errors = if exhaustive {
        Some(alloc::vec![0.0; m])
    } else if permutations >= 2 {
        Some(moments.iter().map(Moments::standard_error).collect())
    } else {
        None
    };
    Ok(Attribution {
        phi,
        base_value,
        target_score: vf.inner.target(),
        backend: Backend::Sampled,
        background_digest: background.digest(),
        standard_errors,
        seed: Some(seed),
    })
}
