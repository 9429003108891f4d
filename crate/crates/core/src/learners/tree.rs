//! CART decision tree with Gini impurity.

use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, Samples};
use crate::{Error, Result};

/// Number of features examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `max(1, floor(sqrt(d)))`, the usual random-forest setting.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub(crate) fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Count(c) => c.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }
}

/// Tree node. Samples with `x[feature] < threshold` go left.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [u32; 2],
    },
}

// Thresholds compare by bit pattern so structural equality is an
// equivalence relation.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Node::Split {
                    feature: f1,
                    threshold: t1,
                    left: l1,
                    right: r1,
                },
                Node::Split {
                    feature: f2,
                    threshold: t2,
                    left: l2,
                    right: r2,
                },
            ) => f1 == f2 && t1.to_bits() == t2.to_bits() && l1 == l2 && r1 == r2,
            (Node::Leaf { counts: a }, Node::Leaf { counts: b }) => a == b,
            _ => false,
        }
    }
}

impl Eq for Node {}

impl Hash for Node {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match *self {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                0u8.hash(state);
                feature.hash(state);
                threshold.to_bits().hash(state);
                left.hash(state);
                right.hash(state);
            }
            Node::Leaf { counts } => {
                1u8.hash(state);
                counts.hash(state);
            }
        }
    }
}

impl Node {
    pub fn leaf_proba(counts: [u32; 2]) -> [f64; 2] {
        let total = f64::from(counts[0]) + f64::from(counts[1]);
        [f64::from(counts[0]) / total, f64::from(counts[1]) / total]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    /// Nodes in preorder; index 0 is the root.
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub params: TreeParams,
}

impl DecisionTreeModel {
    /// A tree consisting of one leaf.
    pub fn leaf(counts: [u32; 2], n_features: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf { counts }],
            n_features,
            params: TreeParams::default(),
        }
    }

    /// Leaf reached by `x`.
    pub fn leaf_counts(&self, x: &[f64]) -> [u32; 2] {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match self.nodes[i] {
                Node::Split { left, right, .. } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
                Node::Leaf { .. } => max = max.max(d),
            }
        }
        max
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Checks that the node array is a single-rooted binary tree: every child
    /// index points forward, every node is reached exactly once, features are
    /// in range and leaves are non-empty.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Model(format!("decision tree: {m}")));
        if self.nodes.is_empty() {
            return bad("no nodes".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= self.n_features || !threshold.is_finite() {
                        return bad(format!("node {i} has an invalid split"));
                    }
                    for child in [left, right] {
                        if child <= i || child >= self.nodes.len() || seen[child] {
                            return bad(format!("node {i} has an invalid child {child}"));
                        }
                        seen[child] = true;
                    }
                }
                Node::Leaf { counts } => {
                    if counts[0] == 0 && counts[1] == 0 {
                        return bad(format!("leaf {i} is empty"));
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("unreachable nodes".into());
        }
        Ok(())
    }
}

impl Classifier for DecisionTreeModel {
    fn input_dim(&self) -> usize {
        self.n_features
    }

    fn proba(&self, x: &[f64]) -> [f64; 2] {
        Node::leaf_proba(self.leaf_counts(x))
    }
}

/// Split purity `S_l / n_l + S_r / n_r` with `S = c0² + c1²`, kept as an
/// exact fraction. Maximizing it minimizes the weighted Gini impurity
/// `n - S_l / n_l - S_r / n_r`; exact comparison keeps tie-breaking honest.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of(left: [u64; 2], right: [u64; 2]) -> Self {
        let s = |c: [u64; 2]| u128::from(c[0]) * u128::from(c[0]) + u128::from(c[1]) * u128::from(c[1]);
        let nl = u128::from(left[0] + left[1]);
        let nr = u128::from(right[0] + right[1]);
        Self {
            num: s(left) * nr + s(right) * nl,
            den: nl * nr,
        }
    }

    fn beats(self, other: Self) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct Builder<'a> {
    samples: &'a Samples,
    params: TreeParams,
    n_candidates: usize,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: Purity,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [u32; 2] {
        idx.iter().fold([0, 0], |mut c, &i| {
            c[usize::from(self.samples.label(i))] += 1;
            c
        })
    }

    /// Best split on `feature`, keeping the lowest threshold among ties.
    fn scan_feature(&self, idx: &[usize], feature: usize, best: &mut Option<BestSplit>) {
        let mut pairs: Vec<(f64, u8)> = idx
            .iter()
            .map(|&i| (self.samples.row(i)[feature], self.samples.label(i)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = self.counts(idx).map(u64::from);
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut left = [0u64; 2];
        for i in 0..pairs.len() - 1 {
            left[usize::from(pairs[i].1)] += 1;
            let (lo, hi) = (pairs[i].0, pairs[i + 1].0);
            if lo >= hi {
                continue;
            }
            let n_left = i + 1;
            if n_left < min_leaf || pairs.len() - n_left < min_leaf {
                continue;
            }
            let score = Purity::of(left, [total[0] - left[0], total[1] - left[1]]);
            if best.as_ref().is_none_or(|b| score.beats(b.score)) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold <= lo {
                    threshold = hi;
                }
                *best = Some(BestSplit {
                    feature,
                    threshold,
                    score,
                });
            }
        }
    }

    fn find_split(&mut self, idx: &[usize]) -> Option<BestSplit> {
        let d = self.samples.n_features();
        let mut order: Vec<usize> = (0..d).collect();
        if self.n_candidates < d {
            if let Some(rng) = self.rng.as_deref_mut() {
                order.shuffle(rng);
            }
        }
        // Examine groups of n_candidates features; fall through to the next
        // group only if no valid split exists in the current one.
        for group in order.chunks(self.n_candidates) {
            let mut group = group.to_vec();
            group.sort_unstable();
            let mut best = None;
            for f in group {
                self.scan_feature(idx, f, &mut best);
            }
            if best.is_some() {
                return best;
            }
        }
        None
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(idx);
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_reached = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_reached || idx.len() < self.params.min_samples_split.max(2) {
            return me;
        }
        let Some(split) = self.find_split(idx) else {
            return me;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.samples.row(i)[split.feature] < split.threshold);
        let (mut left, mut right) = (left, right);
        let l = self.build(&mut left, depth + 1);
        let r = self.build(&mut right, depth + 1);
        self.nodes[me] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        me
    }
}

/// Trains a tree on the rows listed in `indices` (repeats allowed, as in a
/// bootstrap sample). `rng` is only consulted when `max_features` is smaller
/// than the feature count.
pub(crate) fn train_tree_on(
    samples: &Samples,
    indices: &[usize],
    params: &TreeParams,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<DecisionTreeModel> {
    if indices.is_empty() {
        return Err(Error::Data("decision tree needs at least one example".into()));
    }
    let mut builder = Builder {
        samples,
        params: *params,
        n_candidates: params.max_features.resolve(samples.n_features()),
        rng,
        nodes: Vec::new(),
    };
    let mut idx = indices.to_vec();
    builder.build(&mut idx, 0);
    Ok(DecisionTreeModel {
        nodes: builder.nodes,
        n_features: samples.n_features(),
        params: *params,
    })
}

/// Greedy CART training. Splits minimize weighted Gini impurity; ties go to
/// the lowest feature index, then the lowest threshold.
pub fn train_tree(samples: &Samples, params: &TreeParams, seed: u64) -> Result<DecisionTreeModel> {
    samples.require_nonempty()?;
    let indices: Vec<usize> = (0..samples.len()).collect();
    let mut rng = crate::seed::derived_rng(seed, "tree", 0);
    train_tree_on(samples, &indices, params, Some(&mut rng))
}
