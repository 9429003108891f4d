use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::train_tree_on;
use super::{Classifier, DecisionTreeModel, MaxFeatures, Samples, TreeParams};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 40,
            tree: TreeParams {
                max_features: MaxFeatures::Sqrt,
                ..TreeParams::default()
            },
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<DecisionTreeModel>,
    pub n_features: usize,
    pub features_per_split: usize,
    /// Per-tree seeds, derived from the training seed.
    pub tree_seeds: Vec<u64>,
}

impl RandomForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

impl Classifier for RandomForestModel {
    fn input_dim(&self) -> usize {
        self.n_features
    }

    /// Arithmetic mean of the tree probabilities, summed in tree order.
    fn proba(&self, x: &[f64]) -> [f64; 2] {
        let (mut s0, mut s1) = (0.0, 0.0);
        for tree in &self.trees {
            let p = tree.proba(x);
            s0 += p[0];
            s1 += p[1];
        }
        let n = self.trees.len() as f64;
        [s0 / n, s1 / n]
    }
}

/// Bagged CART forest. Tree `i` draws its bootstrap sample and per-split
/// feature subsets from `seed::derive(seed, "forest-tree", i)`, so the result
/// does not depend on how trees are scheduled across threads.
pub fn train_forest(samples: &Samples, params: &ForestParams, seed: u64) -> Result<RandomForestModel> {
    samples.require_nonempty()?;
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument("forest needs at least one tree".into()));
    }
    let n = samples.len();
    let tree_seeds: Vec<u64> = (0..params.n_trees as u64)
        .map(|i| seed::derive(seed, "forest-tree", i))
        .collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = seed::rng(s);
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            train_tree_on(samples, &indices, &params.tree, Some(&mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomForestModel {
        trees,
        n_features: samples.n_features(),
        features_per_split: params.tree.max_features.resolve(samples.n_features()),
        tree_seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdata::synth_generate;
    use crate::learners::train_tree;

    #[test]
    fn single_tree_without_bootstrap_matches_tree() {
        let data = Samples::from_vectors(&synth_generate(200, 0.5, 3));
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            tree: TreeParams::default(),
        };
        let forest = train_forest(&data, &params, 11).unwrap();
        let tree = train_tree(&data, &TreeParams::default(), 11).unwrap();
        assert_eq!(forest.trees[0].nodes, tree.nodes);
        for row in data.rows() {
            assert_eq!(forest.proba(row), tree.proba(row));
        }
    }

    #[test]
    fn identical_trees_average_to_themselves() {
        let t = DecisionTreeModel::leaf([3, 1], 1);
        let forest = RandomForestModel {
            trees: vec![t.clone(), t.clone(), t.clone()],
            n_features: 1,
            features_per_split: 1,
            tree_seeds: vec![0, 0, 0],
        };
        assert_eq!(forest.proba(&[0.0]), t.proba(&[0.0]));
    }

    #[test]
    fn opposite_votes_average_to_half() {
        let forest = RandomForestModel {
            trees: vec![
                DecisionTreeModel::leaf([1, 0], 1),
                DecisionTreeModel::leaf([0, 1], 1),
            ],
            n_features: 1,
            features_per_split: 1,
            tree_seeds: vec![0, 1],
        };
        assert_eq!(forest.proba(&[0.0]), [0.5, 0.5]);
        assert!(matches!(
            forest.predict_proba(&[0.0, 1.0]),
            Err(Error::Dimension { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn deterministic_under_seed() {
        let data = Samples::from_vectors(&synth_generate(300, 0.5, 1));
        let params = ForestParams {
            n_trees: 8,
            ..ForestParams::default()
        };
        let a = train_forest(&data, &params, 5).unwrap();
        let b = train_forest(&data, &params, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.features_per_split, 3);
        assert!(train_forest(&data, &ForestParams { n_trees: 0, ..params }, 5).is_err());
    }
}
