use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schema::{validate_schema, FeatureSchema};
use crate::digest::ContentHasher;
use crate::error::{Error, Result};

/// Encoded tabular data with binary labels.
///
/// Cells are stored row-major as `f64`; categorical cells hold their ordinal
/// code. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<FeatureSchema>,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(schema: Vec<FeatureSchema>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let m = schema.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Schema(format!(
                    "row {} has {} values, expected {}",
                    i,
                    row.len(),
                    m
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(schema, values, labels)
    }

    pub fn from_row_major(
        schema: Vec<FeatureSchema>,
        values: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        validate_schema(&schema)?;
        let m = schema.len();
        if values.len() != labels.len() * m {
            return Err(Error::LengthMismatch {
                expected: labels.len() * m,
                actual: values.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::Schema("dataset has no rows".into()));
        }
        if let Some(i) = labels.iter().position(|&y| y > 1) {
            return Err(Error::Schema(format!("row {}: label must be 0 or 1", i)));
        }
        for (i, row) in values.chunks_exact(m).enumerate() {
            for (f, &v) in schema.iter().zip(row) {
                if !f.accepts(v) {
                    return Err(Error::Schema(format!(
                        "row {}: value {} is not valid for feature `{}`",
                        i, v, f.name
                    )));
                }
            }
        }
        Ok(Self {
            schema,
            values,
            labels,
        })
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_features();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_features())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.iter().map(|f| f.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|f| f.name == name)
    }

    pub fn instance(&self, i: usize) -> Result<Instance> {
        if i >= self.n_rows() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n_rows(),
            });
        }
        Ok(Instance {
            values: self.row(i).to_vec(),
            label: Some(self.labels[i]),
        })
    }

    /// Arithmetic mean of column `j`. A constant column returns its value
    /// unchanged.
    pub fn column_mean(&self, j: usize) -> Result<f64> {
        self.check_feature(j)?;
        let first = self.row(0)[j];
        if self.rows().all(|r| r[j] == first) {
            return Ok(first);
        }
        let n = self.n_rows() as f64;
        let mean = self.rows().map(|r| r[j]).sum::<f64>() / n;
        // one refinement pass to shed most of the summation error
        let resid = self.rows().map(|r| r[j] - mean).sum::<f64>() / n;
        Ok(mean + resid)
    }

    pub fn fraction_positive(&self) -> f64 {
        self.labels.iter().filter(|&&y| y == 1).count() as f64 / self.n_rows() as f64
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.n_features());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            schema: self.schema.clone(),
            values,
            labels,
        }
    }

    /// Uniform sample of `k` rows without replacement, kept in original
    /// order. Returns a clone when `k >= n`. The chosen row indices depend
    /// only on `(n, k, seed)`.
    pub fn subsample(&self, k: usize, seed: u64) -> Self {
        let n = self.n_rows();
        if k >= n {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
        idx.sort_unstable();
        self.select(&idx)
    }

    pub fn digest(&self) -> String {
        let mut h = ContentHasher::new();
        h.usize(self.n_rows()).usize(self.n_features());
        for f in &self.schema {
            h.str(&f.name);
        }
        for &v in &self.values {
            h.f64(v);
        }
        h.finish()
    }

    fn check_feature(&self, j: usize) -> Result<()> {
        if j >= self.n_features() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.n_features(),
            });
        }
        Ok(())
    }
}

/// A single row to explain.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<f64>,
    pub label: Option<u8>,
}

impl Instance {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            label: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Arity and per-feature range check against `schema`.
    pub fn validate(&self, schema: &[FeatureSchema]) -> Result<()> {
        if self.values.len() != schema.len() {
            return Err(Error::Schema(format!(
                "instance has {} values, schema has {} features",
                self.values.len(),
                schema.len()
            )));
        }
        for (f, &v) in schema.iter().zip(&self.values) {
            if !f.accepts(v) {
                return Err(Error::Schema(format!(
                    "value {} is not valid for feature `{}`",
                    v, f.name
                )));
            }
        }
        Ok(())
    }
}

/// Dataset with one column replaced by its mean.
#[derive(Debug, Clone)]
pub struct ReducedDataset<'a> {
    pub base: &'a Dataset,
    pub reduced_feature: usize,
    pub replacement_value: f64,
}

impl ReducedDataset<'_> {
    /// Copy of the base with column `reduced_feature` set to the
    /// replacement value. The categorical range check is waived for that
    /// column only.
    pub fn materialize(&self) -> Dataset {
        let m = self.base.n_features();
        let mut values = self.base.values.clone();
        for row in values.chunks_exact_mut(m) {
            row[self.reduced_feature] = self.replacement_value;
        }
        Dataset {
            schema: self.base.schema.clone(),
            values,
            labels: self.base.labels.clone(),
        }
    }
}

/// Replaces feature `j` of every row with its column mean.
pub fn reduce_dataset(d: &Dataset, j: usize) -> Result<ReducedDataset<'_>> {
    let replacement_value = d.column_mean(j)?;
    Ok(ReducedDataset {
        base: d,
        reduced_feature: j,
        replacement_value,
    })
}

/// Like [`reduce_dataset`] with an externally supplied replacement value
/// (for example a mean taken over a larger dataset).
pub fn reduce_dataset_with(
    d: &Dataset,
    j: usize,
    replacement_value: f64,
) -> Result<ReducedDataset<'_>> {
    d.check_feature(j)?;
    if !replacement_value.is_finite() {
        return Err(Error::InvalidArgument(
            "replacement value must be finite".into(),
        ));
    }
    Ok(ReducedDataset {
        base: d,
        reduced_feature: j,
        replacement_value,
    })
}

pub fn nullify_instance(x: &Instance, j: usize, replacement_value: f64) -> Result<Instance> {
    if j >= x.values.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: x.values.len(),
        });
    }
    let mut out = x.clone();
    out.values[j] = replacement_value;
    Ok(out)
}

/// Seeded uniform row split into `(train, test)`; `floor(n * fraction)`
/// rows go to train. Each part keeps the original row order.
pub fn split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {}",
            train_fraction
        )));
    }
    let n = d.n_rows();
    let n_train = libm::floor(n as f64 * train_fraction) as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {} of {} rows leaves an empty part",
            train_fraction, n
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let (train, test) = idx.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.select(train), d.select(test)))
}
