//! Typed tabular data, mean-nullification and a seeded synthetic generator.

mod dataset;
mod schema;
mod synth;

pub use dataset::{
    nullify_instance, reduce_dataset, reduce_dataset_with, split, Dataset, Instance, ReducedDataset,
};
pub use schema::{validate_schema, FeatureKind, FeatureSchema};
pub use synth::{generate_synthetic, FeatureSpec, GeneratorConfig, SYNTHETIC_FEATURES};
