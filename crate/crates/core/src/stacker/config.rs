use serde::{Deserialize, Serialize};

use crate::learners::{ForestParams, LogRegParams, MlpParams, TreeParams};
use crate::{Error, Result};

/// Hyperparameters for the whole stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub forest: ForestParams,
    pub logreg: LogRegParams,
    pub tree: TreeParams,
    pub intermediate_mlp: MlpParams,
    pub meta_mlp: MlpParams,
    /// Folds used to build the intermediate layer's training features.
    pub k_base: usize,
    /// Folds used to build the meta layer's training features.
    pub k_intermediate: usize,
    pub seed: u64,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            forest: ForestParams::default(),
            logreg: LogRegParams::default(),
            tree: TreeParams {
                max_depth: Some(5),
                min_samples_leaf: 5,
                ..TreeParams::default()
            },
            intermediate_mlp: MlpParams {
                l1: 0.01,
                ..MlpParams::with_hidden(&[5, 5])
            },
            meta_mlp: MlpParams {
                l1: 0.01,
                ..MlpParams::with_hidden(&[12, 12])
            },
            k_base: 2,
            k_intermediate: 3,
            seed: 0,
        }
    }
}

impl StackConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        if self.k_base < 2 || self.k_intermediate < 2 {
            return invalid(format!(
                "fold counts must be >= 2, got k_base = {}, k_intermediate = {}",
                self.k_base, self.k_intermediate
            ));
        }
        if self.forest.n_trees == 0 {
            return invalid("forest needs at least one tree".into());
        }
        for (name, mlp) in [("intermediate", &self.intermediate_mlp), ("meta", &self.meta_mlp)] {
            if mlp.hidden.is_empty() || mlp.hidden.contains(&0) {
                return invalid(format!("{name} mlp hidden sizes must be positive, got {:?}", mlp.hidden));
            }
        }
        Ok(())
    }
}
