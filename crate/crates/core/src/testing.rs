//! Helpers shared by unit tests.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, FeatureSchema, Instance};
use crate::model::{GbdtModel, Node, RegressionTree};

pub fn numeric_schema(m: usize) -> Vec<FeatureSchema> {
    (0..m)
        .map(|i| FeatureSchema::numerical(alloc::format!("f{}", i)))
        .collect()
}

pub fn random_dataset(n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    Dataset::new(numeric_schema(m), rows, labels).unwrap()
}

pub fn random_instance(m: usize, rng: &mut ChaCha8Rng) -> Instance {
    Instance::new((0..m).map(|_| rng.random_range(-2.0..2.0)).collect())
}

fn random_tree(m: usize, depth: usize, allowed: &[usize], rng: &mut ChaCha8Rng) -> RegressionTree {
    fn grow(nodes: &mut Vec<Node>, depth: usize, allowed: &[usize], rng: &mut ChaCha8Rng) -> usize {
        let id = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        if depth == 0 || rng.random_bool(0.15) {
            nodes[id] = Node::Leaf {
                value: rng.random_range(-1.0..1.0),
            };
            return id;
        }
        let feature = allowed[rng.random_range(0..allowed.len())];
        let threshold = rng.random_range(-1.5..1.5);
        let left = grow(nodes, depth - 1, allowed, rng);
        let right = grow(nodes, depth - 1, allowed, rng);
        nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
    let _ = m;
    let mut nodes = Vec::new();
    grow(&mut nodes, depth, allowed, rng);
    RegressionTree { nodes }
}

/// Random ensemble that only splits on features in `allowed`.
pub fn random_gbdt_on(m: usize, allowed: &[usize], seed: u64) -> GbdtModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = (0..20)
        .map(|_| random_tree(m, 3, allowed, &mut rng))
        .collect();
    GbdtModel::from_parts(m, rng.random_range(-0.5..0.5), 0.5, 3, trees).unwrap()
}

pub fn random_gbdt(m: usize, seed: u64) -> GbdtModel {
    let all: Vec<usize> = (0..m).collect();
    random_gbdt_on(m, &all, seed)
}
