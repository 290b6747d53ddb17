//! Submodular kernels for ranked data.
//!
//! Rankings of any kind (full, top-k, interleaving) are encoded as
//! [`OrderedPartition`]s. Given a submodular set function, typically the cut
//! function of an object-similarity [`InformationGraph`], each exhaustive
//! ranking maps to an `n`-dimensional [`FeatureMap`] obtained by weighted
//! isotonic regression over its blocks; the kernel between two rankings is
//! the inner product of their maps. Non-exhaustive rankings use the mean map
//! over their coherent exhaustive extensions, enumerated or sampled.
//!
//! ```
//! use subkernel::{build_graph, feature_map, k_s, OrderedPartition};
//!
//! let features = vec![vec![0.0], vec![0.2], vec![1.0]];
//! let graph = build_graph(&features, None, 1.0).unwrap();
//! let a = OrderedPartition::from_permutation(&[0, 1, 2]).unwrap();
//! let b = OrderedPartition::from_permutation(&[2, 1, 0]).unwrap();
//! let (pa, pb) = (feature_map(&graph, &a).unwrap(), feature_map(&graph, &b).unwrap());
//! assert!(k_s(&pa, &pb).unwrap() < 0.0);
//! ```

pub mod classify;
pub mod datasets;
pub mod error;
pub mod graph;
pub mod io;
pub mod isotonic;
pub mod kernels;
pub mod ranking;
pub mod rng;
pub mod submodular;

pub use classify::{
    dummy_predictions, evaluate, f1_score, predict, split, train_krr, Evaluation, KrrModel, Label,
    LabeledRankingDataset, DEFAULT_REGULARIZATION,
};
pub use datasets::{
    censor, food_scores, generate_dataset, noise_free_preferences, sample_food_ranking, CensorKind, UserType,
};
pub use error::{Error, Result};
pub use graph::{build_graph, InformationGraph};
pub use isotonic::{
    basic_partition, block_targets, feature_map, isotonic_bruteforce, mean_feature_map, pava, BlockTargets,
    ExtensionMode, FeatureMap,
};
pub use kernels::{
    gram_baseline, gram_submodular, gram_submodular_timed, k_c, k_s, kendall_tau, mallows, psd_check, BaselineKind,
    GramMatrix, KernelKind, PhaseTimings,
};
pub use ranking::{parse_ranking, OrderedPartition, Universe, DEFAULT_ENUMERATION_BUDGET};
pub use submodular::{
    greedy_vertex, in_base_polytope, in_tangent_cone, is_compatible, is_submodular, lovasz_extension,
    CustomSetFunction, ModularFunction, SetFunction,
};
