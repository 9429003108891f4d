//! Model reduction: retraining at smaller forest and MLP sizes behind an
//! accuracy gate, duplicate-tree detection, and exact dead-node pruning.

mod duplicates;
mod prune;
mod reduction;

pub use duplicates::{find_duplicate_trees, find_duplicate_trees_with, structural_hash};
pub use prune::{
    prune_mlp_dead_nodes, prune_mlp_dead_nodes_with_probes, prune_super_learner, PruneResult,
    PruneStats, PrunedModel,
};
pub use reduction::{
    feature_reduction_loop, reduce_forest, reduce_mlp, MlpStage, ReductionReport,
    ReductionSchedule, ReductionStep, StepKind, sha256_hex,
};
