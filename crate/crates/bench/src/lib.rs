//! Fixtures shared by the criterion benches.

use subkernel::datasets::food_features;
use subkernel::{build_graph, generate_dataset, BlockTargets, CensorKind, InformationGraph, OrderedPartition};

/// Food-model information graph with the default lengthscale and all edges.
pub fn food_graph() -> InformationGraph {
    build_graph(&food_features(), None, 1.0).expect("food features are valid")
}

/// `m` synthetic food rankings of the given kind at noise 0.5.
pub fn food_rankings(m: usize, kind: CensorKind, seed: u64) -> Vec<OrderedPartition> {
    generate_dataset(m, 0.5, kind, seed).expect("valid dataset size").rankings
}

/// Alternating block targets, worst case for pooling.
pub fn zigzag_targets(l: usize) -> BlockTargets {
    let targets = (0..l).map(|i| if i % 2 == 0 { (l - i) as f64 } else { -(i as f64) }).collect();
    BlockTargets::new(targets, vec![1.0; l]).expect("finite targets")
}

/// Full permutation of `0..n` from a fixed multiplicative stride.
pub fn strided_permutation(n: usize, stride: usize) -> Vec<usize> {
    (0..n).map(|i| (i * stride) % n).collect()
}
