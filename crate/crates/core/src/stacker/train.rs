use super::model::{BaseLayer, IntermediateLayer, SuperLearnerModel};
use super::{StackConfig, STACK_WIDTH};
use crate::flowdata::{stratified_kfold_labels, Encoder, FeatureVector, FoldPlan};
use crate::learners::{
    train_forest, train_logreg, train_mlp, train_tree, Samples,
};
use crate::{seed, Error, Result};

/// Out-of-fold probability features for one layer, row-aligned with that
/// layer's training examples.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedFeatures {
    pub features: Samples,
    /// Fold that produced each row.
    pub fold_of_row: Vec<usize>,
    /// Training rows of each fold's models.
    pub fold_train_indices: Vec<Vec<usize>>,
}

impl StackedFeatures {
    /// True when no row was predicted by a model that trained on it.
    pub fn is_out_of_fold(&self) -> bool {
        self.fold_of_row.iter().enumerate().all(|(row, &f)| {
            self.fold_train_indices
                .get(f)
                .is_some_and(|train| !train.contains(&row))
        })
    }
}

#[derive(Debug, Clone)]
pub struct StackTrace {
    pub base_plan: FoldPlan,
    pub base_features: StackedFeatures,
    pub intermediate_plan: FoldPlan,
    pub intermediate_features: StackedFeatures,
}

fn out_of_fold<L>(
    samples: &Samples,
    plan: &FoldPlan,
    fit: impl Fn(&Samples, u64) -> Result<L>,
    transform: impl Fn(&L, &[f64]) -> [f64; STACK_WIDTH],
) -> Result<StackedFeatures> {
    let mut data = vec![0.0; samples.len() * STACK_WIDTH];
    let mut fold_train_indices = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let train_idx = plan.complement(fold);
        let layer = fit(&samples.subset(&train_idx), fold as u64)?;
        for row in plan.fold(fold) {
            data[row * STACK_WIDTH..(row + 1) * STACK_WIDTH]
                .copy_from_slice(&transform(&layer, samples.row(row)));
        }
        fold_train_indices.push(train_idx);
    }
    Ok(StackedFeatures {
        features: Samples::new(data, STACK_WIDTH, samples.labels().to_vec())?,
        fold_of_row: plan.assignments.clone(),
        fold_train_indices,
    })
}

fn fit_base(config: &StackConfig, samples: &Samples, index: u64) -> Result<BaseLayer> {
    let s = config.seed;
    Ok(BaseLayer {
        random_forest: train_forest(samples, &config.forest, seed::derive(s, "base-forest", index))
            .map_err(|e| Error::training("base", "random_forest", e))?,
        logistic_regression: train_logreg(samples, &config.logreg, seed::derive(s, "base-logreg", index))
            .map_err(|e| Error::training("base", "logistic_regression", e))?,
    })
}

fn fit_intermediate(config: &StackConfig, samples: &Samples, index: u64) -> Result<IntermediateLayer> {
    let s = config.seed;
    Ok(IntermediateLayer {
        decision_tree: train_tree(samples, &config.tree, seed::derive(s, "intermediate-tree", index))
            .map_err(|e| Error::training("intermediate", "decision_tree", e))?,
        mlp: train_mlp(samples, &config.intermediate_mlp, seed::derive(s, "intermediate-mlp", index))
            .map_err(|e| Error::training("intermediate", "mlp", e))?,
    })
}

/// Trains the stack and returns the intermediate stacked features with
/// their fold provenance.
///
/// 1. Base learners are trained on `k_base - 1` folds and predict the held
///    out fold, producing 4 probability columns for every training row.
/// 2. The same procedure with `k_intermediate` folds over those columns
///    produces the meta learner's 4 input columns.
/// 3. The meta MLP is trained on the second set of columns.
/// 4. Base and intermediate learners are refit on all of their input for
///    inference, and the model is finalized.
pub fn train_super_learner_traced(
    train: &[FeatureVector],
    encoder: Encoder,
    config: &StackConfig,
) -> Result<(SuperLearnerModel, StackTrace)> {
    config.validate()?;
    let samples = Samples::from_vectors(train);
    let counts = samples.class_counts();
    let k_max = config.k_base.max(config.k_intermediate);
    if counts.iter().any(|&c| c < k_max) {
        return Err(Error::Data(format!(
            "each class needs at least {k_max} examples, got {counts:?}"
        )));
    }
    let base_plan = stratified_kfold_labels(samples.labels(), config.k_base, seed::derive(config.seed, "base-folds", 0))?;
    let fit_b = |s: &Samples, i: u64| fit_base(config, s, i);
    let base_features = out_of_fold(&samples, &base_plan, fit_b, BaseLayer::transform)?;

    let s1 = &base_features.features;
    let intermediate_plan = stratified_kfold_labels(s1.labels(), config.k_intermediate, seed::derive(config.seed, "intermediate-folds", 0))?;
    let fit_i = |s: &Samples, i: u64| fit_intermediate(config, s, i);
    let intermediate_features = out_of_fold(s1, &intermediate_plan, fit_i, IntermediateLayer::transform)?;

    let meta = train_mlp(
        &intermediate_features.features,
        &config.meta_mlp,
        seed::derive(config.seed, "meta-mlp", 0),
    )
    .map_err(|e| Error::training("meta", "mlp", e))?;

    // refits use an index past the last fold so their seeds differ from the fold models
    let base = fit_base(config, &samples, config.k_base as u64)?;
    let intermediate = fit_intermediate(config, s1, config.k_intermediate as u64)?;

    let model = SuperLearnerModel::from_parts(encoder, base, intermediate, meta, config.clone()).finalize()?;
    Ok((
        model,
        StackTrace {
            base_plan,
            base_features,
            intermediate_plan,
            intermediate_features,
        },
    ))
}

pub fn train_super_learner(
    train: &[FeatureVector],
    encoder: Encoder,
    config: &StackConfig,
) -> Result<SuperLearnerModel> {
    train_super_learner_traced(train, encoder, config).map(|(m, _)| m)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdata::synth_generate;

    fn quick_config(seed: u64) -> StackConfig {
        let mut c = StackConfig::with_seed(seed);
        c.forest.n_trees = 5;
        c.intermediate_mlp.epochs = 20;
        c.meta_mlp.epochs = 20;
        c
    }

    #[test]
    fn shapes_and_provenance() {
        let data = synth_generate(200, 0.6, 1);
        let (model, trace) = train_super_learner_traced(&data, Encoder::default(), &quick_config(3)).unwrap();
        assert!(model.is_finalized());
        assert_eq!(model.layer_dims(), [15, 4, 4, 2]);
        assert_eq!(trace.base_features.features.len(), 200);
        assert_eq!(trace.base_features.features.n_features(), 4);
        assert_eq!(trace.intermediate_features.features.len(), 200);
        assert!(trace.base_features.is_out_of_fold());
        assert!(trace.intermediate_features.is_out_of_fold());
    }

    #[test]
    fn too_few_examples_per_class() {
        let mut data = synth_generate(40, 0.5, 1);
        let mut benign: Vec<_> = data.iter().filter(|v| v.label == 0).copied().take(2).collect();
        data.retain(|v| v.label == 1);
        data.append(&mut benign);
        assert!(matches!(
            train_super_learner(&data, Encoder::default(), &quick_config(0)),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn deterministic() {
        let data = synth_generate(150, 0.5, 2);
        let a = train_super_learner(&data, Encoder::default(), &quick_config(9)).unwrap();
        let b = train_super_learner(&data, Encoder::default(), &quick_config(9)).unwrap();
        assert_eq!(a, b);
    }
}
