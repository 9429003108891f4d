//! Exact removal of hidden units that cannot influence the output.
//!
//! Hidden unit `j` is removed when either
//! - every outgoing weight of `j` is zero, or
//! - every incoming weight and the bias of `j` are zero and the layer's
//!   activation maps 0 to 0 (ReLU), so the unit always outputs 0.
//!
//! Both cases only delete terms that are exactly zero from the next layer's
//! sums, so outputs are unchanged for every finite input. Removing a unit can
//! make units in neighbouring layers dead, so passes repeat until nothing
//! changes.

use rand::Rng;

use crate::learners::{Activation, Classifier, MlpModel};
use crate::seed;
use crate::stacker::SuperLearnerModel;

#[derive(Debug, Clone, PartialEq)]
pub struct PruneResult {
    pub mlp: MlpModel,
    pub stats: PruneStats,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PruneStats {
    pub hidden_before: Vec<usize>,
    pub hidden_after: Vec<usize>,
    pub removed_per_layer: Vec<usize>,
    /// Layers where a dead unit was kept because it was the last one.
    pub floored_layers: Vec<usize>,
    /// Passes that removed at least one unit.
    pub passes: usize,
    /// Largest `|Δp|` between original and pruned model on the probe set.
    pub max_deviation: f64,
    pub probes: usize,
}

impl PruneStats {
    pub fn removed(&self) -> usize {
        self.removed_per_layer.iter().sum()
    }
}

fn outgoing_zero(mlp: &MlpModel, k: usize, j: usize) -> bool {
    let next = &mlp.layers[k + 1];
    (0..next.n_out).all(|o| next.weight(o, j) == 0.0)
}

fn incoming_zero(mlp: &MlpModel, k: usize, j: usize) -> bool {
    let layer = &mlp.layers[k];
    layer.activation == Activation::Relu
        && layer.biases[j] == 0.0
        && (0..layer.n_in).all(|i| layer.weight(j, i) == 0.0)
}

fn remove_unit(mlp: &mut MlpModel, k: usize, j: usize) {
    let layer = &mut mlp.layers[k];
    let n_in = layer.n_in;
    layer.weights.drain(j * n_in..(j + 1) * n_in);
    layer.biases.remove(j);
    layer.n_out -= 1;
    let next = &mut mlp.layers[k + 1];
    let old_in = next.n_in;
    let mut kept = Vec::with_capacity(next.weights.len() - next.n_out);
    for (idx, &w) in next.weights.iter().enumerate() {
        if idx % old_in != j {
            kept.push(w);
        }
    }
    next.weights = kept;
    next.n_in -= 1;
}

/// Probe inputs: seeded uniform draws over `[-scale, scale]` plus zeros,
/// large magnitudes and all-negative corners.
fn probe_set(dim: usize, count: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut rng = seed::derived_rng(0, "prune-probes", dim as u64);
    let mut probes = vec![vec![0.0; dim], vec![1e6; dim], vec![-1e6; dim], vec![-1.0; dim], vec![1.0; dim]];
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1e3;
        probes.push(e);
    }
    while probes.len() < count {
        probes.push((0..dim).map(|_| rng.random_range(-scale..=scale)).collect());
    }
    probes
}

fn max_deviation(a: &MlpModel, b: &MlpModel, probes: &[Vec<f64>]) -> f64 {
    probes
        .iter()
        .map(|x| {
            let (p, q) = (a.proba(x), b.proba(x));
            (p[0] - q[0]).abs().max((p[1] - q[1]).abs())
        })
        .fold(0.0, f64::max)
}

pub fn prune_mlp_dead_nodes_with_probes(mlp: &MlpModel, probes: &[Vec<f64>]) -> PruneResult {
    let hidden_before = mlp.hidden_sizes();
    let n_hidden = hidden_before.len();
    let mut pruned = mlp.clone();
    let mut removed_per_layer = vec![0; n_hidden];
    let mut floored = vec![false; n_hidden];
    let mut passes = 0;
    loop {
        let mut changed = false;
        for k in 0..n_hidden {
            for j in (0..pruned.layers[k].n_out).rev() {
                if !(outgoing_zero(&pruned, k, j) || incoming_zero(&pruned, k, j)) {
                    continue;
                }
                if pruned.layers[k].n_out == 1 {
                    floored[k] = true;
                    continue;
                }
                remove_unit(&mut pruned, k, j);
                removed_per_layer[k] += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        passes += 1;
    }
    let max_deviation = max_deviation(mlp, &pruned, probes);
    PruneResult {
        stats: PruneStats {
            hidden_after: pruned.hidden_sizes(),
            hidden_before,
            removed_per_layer,
            floored_layers: floored
                .iter()
                .enumerate()
                .filter_map(|(k, &f)| f.then_some(k))
                .collect(),
            passes,
            max_deviation,
            probes: probes.len(),
        },
        mlp: pruned,
    }
}

/// Prunes with a default probe set of 1,000 inputs.
pub fn prune_mlp_dead_nodes(mlp: &MlpModel) -> PruneResult {
    let probes = probe_set(mlp.input_dim(), 1000, 10.0);
    prune_mlp_dead_nodes_with_probes(mlp, &probes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrunedModel {
    pub model: SuperLearnerModel,
    pub intermediate: PruneStats,
    pub meta: PruneStats,
}

/// Prunes the intermediate and meta MLPs without retraining. Probes for
/// both are drawn from the unit cube, the range of stacked probabilities.
pub fn prune_super_learner(model: &SuperLearnerModel) -> crate::Result<PrunedModel> {
    if !model.is_finalized() {
        return Err(crate::Error::NotFinalized);
    }
    let probes = probe_set(crate::stacker::STACK_WIDTH, 1000, 1.0);
    let intermediate = prune_mlp_dead_nodes_with_probes(&model.intermediate.mlp, &probes);
    let meta = prune_mlp_dead_nodes_with_probes(&model.meta, &probes);
    let mut pruned = model.clone();
    pruned.intermediate.mlp = intermediate.mlp;
    pruned.meta = meta.mlp;
    Ok(PrunedModel {
        model: pruned.finalize()?,
        intermediate: intermediate.stats,
        meta: meta.stats,
    })
}
