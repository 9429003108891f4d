use serde::{Deserialize, Serialize};

use super::{StackConfig, STACK_WIDTH};
use crate::flowdata::{encode, Encoder, FlowRecord, FEATURE_COUNT};
use crate::learners::{
    check_dim, Classifier, DecisionTreeModel, LogisticRegressionModel, MlpModel, Node,
    RandomForestModel,
};
use crate::{Error, Result};

/// Concatenates each learner's `[p0, p1]` in the given order.
pub fn layer_transform(learners: &[&dyn Classifier], x: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * learners.len());
    for l in learners {
        out.extend_from_slice(&l.predict_proba(x)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseLayer {
    pub random_forest: RandomForestModel,
    pub logistic_regression: LogisticRegressionModel,
}

impl BaseLayer {
    #[inline]
    pub fn transform(&self, x: &[f64]) -> [f64; STACK_WIDTH] {
        let a = self.random_forest.proba(x);
        let b = self.logistic_regression.proba(x);
        [a[0], a[1], b[0], b[1]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntermediateLayer {
    pub decision_tree: DecisionTreeModel,
    pub mlp: MlpModel,
}

impl IntermediateLayer {
    #[inline]
    pub fn transform(&self, s1: &[f64]) -> [f64; STACK_WIDTH] {
        let a = self.decision_tree.proba(s1);
        let b = self.mlp.proba(s1);
        [a[0], a[1], b[0], b[1]]
    }
}

/// Where a model came from. `created` is supplied by the caller (never read
/// from the clock) so that identical runs write identical files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub created: String,
    pub input_sha256: Option<String>,
    pub run_config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperLearnerModel {
    pub(crate) encoder: Encoder,
    pub(crate) base: BaseLayer,
    pub(crate) intermediate: IntermediateLayer,
    pub(crate) meta: MlpModel,
    pub(crate) config: StackConfig,
    pub(crate) provenance: Provenance,
    pub(crate) finalized: bool,
}

fn tree_parameter_count(tree: &DecisionTreeModel) -> usize {
    tree.nodes
        .iter()
        .map(|n| match n {
            Node::Split { .. } => 4,
            Node::Leaf { .. } => 2,
        })
        .sum()
}

impl SuperLearnerModel {
    /// Assembles an unfinalized model from trained layers.
    pub fn from_parts(
        encoder: Encoder,
        base: BaseLayer,
        intermediate: IntermediateLayer,
        meta: MlpModel,
        config: StackConfig,
    ) -> Self {
        Self {
            encoder,
            base,
            intermediate,
            meta,
            config,
            provenance: Provenance::default(),
            finalized: false,
        }
    }

    /// Validates layer shapes and freezes the model.
    pub fn finalize(mut self) -> Result<Self> {
        self.validate()?;
        self.finalized = true;
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let expect = |what: &str, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::Schema {
                    field: format!("{what} input width"),
                    expected: expected.to_string(),
                    found: found.to_string(),
                })
            }
        };
        let rf = &self.base.random_forest;
        if rf.trees.is_empty() {
            return Err(Error::Model("random forest has no trees".into()));
        }
        expect("random_forest", FEATURE_COUNT, rf.n_features)?;
        for tree in &rf.trees {
            expect("random_forest tree", FEATURE_COUNT, tree.n_features)?;
            tree.validate()?;
        }
        expect("logistic_regression", FEATURE_COUNT, self.base.logistic_regression.weights.len())?;
        if !self.base.logistic_regression.bias.is_finite()
            || self.base.logistic_regression.weights.iter().any(|w| !w.is_finite())
        {
            return Err(Error::Model("logistic regression has non-finite weights".into()));
        }
        let dt = &self.intermediate.decision_tree;
        expect("decision_tree", STACK_WIDTH, dt.n_features)?;
        dt.validate()?;
        self.intermediate.mlp.validate()?;
        expect("intermediate mlp", STACK_WIDTH, self.intermediate.mlp.input_dim())?;
        self.meta.validate()?;
        expect("meta mlp", STACK_WIDTH, self.meta.input_dim())?;
        Ok(())
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn base(&self) -> &BaseLayer {
        &self.base
    }

    pub fn intermediate(&self) -> &IntermediateLayer {
        &self.intermediate
    }

    pub fn meta(&self) -> &MlpModel {
        &self.meta
    }

    pub fn config(&self) -> &StackConfig {
        &self.config
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `(input, base output, intermediate output, meta output)` widths.
    pub fn layer_dims(&self) -> [usize; 4] {
        [
            self.base.random_forest.n_features,
            2 * super::BASE_LEARNERS.len(),
            2 * super::INTERMEDIATE_LEARNERS.len(),
            self.meta.layers.last().map_or(0, |l| l.n_out),
        ]
    }

    /// Tree nodes weighted by their stored fields (4 per split, 2 per leaf)
    /// plus every weight and bias.
    pub fn parameter_count(&self) -> usize {
        let forest: usize = self
            .base
            .random_forest
            .trees
            .iter()
            .map(tree_parameter_count)
            .sum();
        forest
            + self.base.logistic_regression.weights.len()
            + 1
            + tree_parameter_count(&self.intermediate.decision_tree)
            + self.intermediate.mlp.parameter_count()
            + self.meta.parameter_count()
    }

    /// Full chain without checks; `x` must have 15 values.
    #[inline]
    pub(crate) fn proba_unchecked(&self, x: &[f64]) -> [f64; 2] {
        let s1 = self.base.transform(x);
        let s2 = self.intermediate.transform(&s1);
        self.meta.proba(&s2)
    }

    /// Base → intermediate → meta. The ROC score convention is `p1`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; 2]> {
        if !self.finalized {
            return Err(Error::NotFinalized);
        }
        check_dim(FEATURE_COUNT, x.len())?;
        Ok(self.proba_unchecked(x))
    }

    pub fn predict_proba_record(&self, record: &FlowRecord) -> Result<[f64; 2]> {
        let v = encode(record, &self.encoder);
        self.predict_proba(&v.values)
    }

    pub fn predict_class(&self, x: &[f64]) -> Result<u8> {
        self.predict_proba(x).map(crate::learners::predicted_class)
    }
}
