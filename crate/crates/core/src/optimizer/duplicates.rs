use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use crate::learners::{DecisionTreeModel, RandomForestModel};

/// Hash of a tree's topology, split features, thresholds and leaf counts.
pub fn structural_hash(tree: &DecisionTreeModel) -> u64 {
    let mut h = DefaultHasher::new();
    tree.nodes.hash(&mut h);
    h.finish()
}

/// Groups of structurally identical trees (indices into `forest.trees`),
/// each of size two or more, ordered by their first member.
pub fn find_duplicate_trees(forest: &RandomForestModel) -> Vec<Vec<usize>> {
    find_duplicate_trees_with(forest, structural_hash)
}

/// Same as [`find_duplicate_trees`] with a caller-supplied bucket hash.
/// Trees sharing a bucket are still compared node by node, so a weak hash
/// only costs time.
pub fn find_duplicate_trees_with(
    forest: &RandomForestModel,
    hash: impl Fn(&DecisionTreeModel) -> u64,
) -> Vec<Vec<usize>> {
    let mut buckets: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, tree) in forest.trees.iter().enumerate() {
        buckets.entry(hash(tree)).or_default().push(i);
    }
    let mut groups = Vec::new();
    for members in buckets.into_values() {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in members {
            let tree = &forest.trees[i].nodes;
            match classes.iter_mut().find(|c| forest.trees[c[0]].nodes == *tree) {
                Some(class) => class.push(i),
                None => classes.push(vec![i]),
            }
        }
        groups.extend(classes.into_iter().filter(|c| c.len() > 1));
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{Node, TreeParams};

    fn stump(threshold: f64) -> DecisionTreeModel {
        DecisionTreeModel {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { counts: [3, 0] },
                Node::Leaf { counts: [0, 2] },
            ],
            n_features: 1,
            params: TreeParams::default(),
        }
    }

    fn forest(trees: Vec<DecisionTreeModel>) -> RandomForestModel {
        let n = trees.len();
        RandomForestModel {
            trees,
            n_features: 1,
            features_per_split: 1,
            tree_seeds: vec![0; n],
        }
    }

    #[test]
    fn three_copies_form_one_group() {
        let f = forest(vec![stump(1.0), stump(1.0), stump(1.0)]);
        assert_eq!(find_duplicate_trees(&f), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn distinct_trees_have_no_groups() {
        let f = forest(vec![stump(1.0), stump(2.0), DecisionTreeModel::leaf([1, 1], 1)]);
        assert!(find_duplicate_trees(&f).is_empty());
    }

    #[test]
    fn constant_hash_still_separates_trees() {
        let f = forest(vec![stump(1.0), stump(2.0), stump(1.0), stump(2.0), stump(3.0)]);
        assert_eq!(find_duplicate_trees_with(&f, |_| 0), vec![vec![0, 2], vec![1, 3]]);
    }
}
