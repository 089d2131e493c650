//! Peer-influence explanations for tabular classifiers.
//!
//! The crate is `no_std` and only needs `alloc`. It holds the numerical
//! pieces: typed tabular data and mean-nullification, two trainable
//! classifiers, interventional Shapley attribution (exact and sampled),
//! and the peer-influence constructions built on top of them: the
//! influence matrix, its support/attack graph, the conflict matrix and the
//! alteration indices used to recommend interventions.
//!
//! File formats, the command line and the HTTP service live in the
//! `peerinf` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod data;
pub mod digest;
pub mod error;
pub mod explain;
pub mod export;
pub mod fixtures;
pub mod model;
pub mod pi;

#[cfg(test)]
pub(crate) mod testing;

pub use data::{
    generate_synthetic, nullify_instance, reduce_dataset, split, Dataset, FeatureKind,
    FeatureSchema, GeneratorConfig, Instance, ReducedDataset,
};
pub use error::{Error, Result};
pub use explain::{explain, shapley_exact, shapley_sampled, Attribution, Backend, ExplainerConfig};
pub use export::{emit_dot, emit_table, DotDocument, DotStyle};
pub use model::{
    train_gbdt, train_logistic, GbdtConfig, GbdtModel, LogisticConfig, LogisticModel, Model,
    ModelKind, Predictor,
};
pub use pi::{
    alt, calt, conflict_matrix, pearson_matrix, pi_explanation, pi_graph, AlterationKind,
    AlterationResult, ConflictMatrix, PiExplanation, PiGraph, ZeroPolicy,
};
