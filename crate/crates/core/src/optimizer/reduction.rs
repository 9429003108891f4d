use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::prune::{prune_super_learner, PruneStats};
use crate::flowdata::{Encoder, FeatureVector};
use crate::learners::Classifier;
use crate::metrics::{confusion, roc_auc, time_inference, DEFAULT_THRESHOLD};
use crate::stacker::{model_to_json, train_super_learner, StackConfig, SuperLearnerModel};
use crate::{Error, Result};

/// Which MLP a shrink step targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlpStage {
    Intermediate,
    Meta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionSchedule {
    /// Candidate tree counts, strictly descending. Entries not below the
    /// current tree count are skipped.
    pub forest_sizes: Vec<usize>,
    /// Units removed from one hidden layer per MLP step.
    pub mlp_step: usize,
    pub mlp_min_size: usize,
    /// MLPs to shrink, in order.
    pub mlp_stages: Vec<MlpStage>,
    /// Shrink the forest before the MLPs.
    pub forest_first: bool,
    /// Largest tolerated accuracy drop, in percentage points, against the
    /// previously accepted model.
    pub gate: f64,
    /// Timing passes per step (best-of).
    pub timing_repetitions: usize,
}

impl Default for ReductionSchedule {
    fn default() -> Self {
        Self {
            forest_sizes: vec![40, 30, 20, 10],
            mlp_step: 1,
            mlp_min_size: 1,
            mlp_stages: vec![MlpStage::Intermediate, MlpStage::Meta],
            forest_first: true,
            gate: 0.5,
            timing_repetitions: 3,
        }
    }
}

/// Slack for float rounding in the gate comparison.
const GATE_EPSILON: f64 = 1e-9;

impl ReductionSchedule {
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.forest_sizes.contains(&0) {
            return invalid("forest sizes must be >= 1");
        }
        if self.forest_sizes.windows(2).any(|w| w[0] <= w[1]) {
            return invalid("forest sizes must be strictly descending");
        }
        if !(self.gate > 0.0) {
            return invalid("gate must be > 0");
        }
        if self.mlp_step == 0 || self.mlp_min_size == 0 {
            return invalid("mlp step and minimum size must be >= 1");
        }
        Ok(())
    }

    /// The gate rule: accept when the drop is at most `gate` points.
    pub fn admits(&self, reference_accuracy: f64, accuracy: f64) -> bool {
        reference_accuracy - accuracy <= self.gate + GATE_EPSILON
    }
}

/// Same stack with a different forest size; the caller retrains.
pub fn reduce_forest(config: &StackConfig, n_trees: usize) -> StackConfig {
    let mut c = config.clone();
    c.forest.n_trees = n_trees.max(1);
    c
}

/// Same stack with one MLP's hidden sizes replaced.
pub fn reduce_mlp(config: &StackConfig, stage: MlpStage, hidden: &[usize]) -> StackConfig {
    let mut c = config.clone();
    match stage {
        MlpStage::Intermediate => c.intermediate_mlp.hidden = hidden.to_vec(),
        MlpStage::Meta => c.meta_mlp.hidden = hidden.to_vec(),
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepKind {
    Baseline,
    Forest,
    Mlp { stage: MlpStage, layer: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub n_trees: usize,
    pub intermediate_hidden: Vec<usize>,
    pub meta_hidden: Vec<usize>,
    /// Validation accuracy of the candidate, percent.
    pub accuracy: f64,
    /// Accuracy of the previously accepted model, percent.
    pub reference_accuracy: f64,
    pub roc_auc: f64,
    pub forest_accuracy: f64,
    pub forest_roc_auc: f64,
    /// Fastest pass over the validation set.
    pub inference: Duration,
    pub parameter_count: usize,
    pub accepted: bool,
    pub reason: String,
    /// Hash of the stored (accepted) model after this step.
    pub stored_model_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub gate: f64,
    pub baseline_accuracy: f64,
    pub steps: Vec<ReductionStep>,
    pub final_n_trees: usize,
    pub final_intermediate_hidden: Vec<usize>,
    pub final_meta_hidden: Vec<usize>,
    pub final_accuracy: f64,
    pub final_parameter_count: usize,
    pub intermediate_pruning: Option<PruneStats>,
    pub meta_pruning: Option<PruneStats>,
    pub notes: Vec<String>,
}

impl ReductionReport {
    pub fn accepted_steps(&self) -> impl Iterator<Item = &ReductionStep> {
        self.steps.iter().filter(|s| s.accepted)
    }

    /// Step table: trees, hidden sizes, inference duration, forest and stack
    /// accuracy / ROC AUC (percent), decision.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<20} {:>5} {:>10} {:>10} {:>12} {:>9} {:>9} {:>9} {:>9} {:>8}",
            "Step", "Trees", "Inter MLP", "Meta MLP", "Inference", "RF Acc", "RF AUC", "SL Acc", "SL AUC", "Decision"
        );
        for step in &self.steps {
            let name = match &step.kind {
                StepKind::Baseline => "baseline".to_string(),
                StepKind::Forest => "forest".to_string(),
                StepKind::Mlp { stage, layer } => format!("{stage:?} mlp[{layer}]").to_lowercase(),
            };
            let _ = writeln!(
                s,
                "{:<20} {:>5} {:>10} {:>10} {:>12} {:>9.2} {:>9.3} {:>9.2} {:>9.3} {:>8}",
                name,
                step.n_trees,
                format!("{:?}", step.intermediate_hidden),
                format!("{:?}", step.meta_hidden),
                format!("{:.3?}", step.inference),
                step.forest_accuracy,
                100.0 * step.forest_roc_auc,
                step.accuracy,
                100.0 * step.roc_auc,
                if step.accepted { "accept" } else { "reject" },
            );
        }
        s
    }
}

/// Lowercase hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

struct Candidate {
    model: SuperLearnerModel,
    accuracy: f64,
    roc_auc: f64,
    forest_accuracy: f64,
    forest_roc_auc: f64,
    inference: Duration,
}

fn evaluate_candidate(model: SuperLearnerModel, valid: &[FeatureVector], reps: usize) -> Result<Candidate> {
    let labels: Vec<u8> = valid.iter().map(|v| v.label).collect();
    let stack: Vec<f64> = valid.iter().map(|v| model.proba_unchecked(&v.values)[1]).collect();
    let forest_scores: Vec<f64> = valid
        .iter()
        .map(|v| model.base.random_forest.proba(&v.values)[1])
        .collect();
    let cm = confusion(&stack, &labels, DEFAULT_THRESHOLD)?;
    let fcm = confusion(&forest_scores, &labels, DEFAULT_THRESHOLD)?;
    let inference = time_inference(valid, reps, |v| model.proba_unchecked(&v.values)).best_total;
    Ok(Candidate {
        accuracy: 100.0 * cm.accuracy(),
        roc_auc: roc_auc(&stack, &labels)?.auc,
        forest_accuracy: 100.0 * fcm.accuracy(),
        forest_roc_auc: roc_auc(&forest_scores, &labels)?.auc,
        inference,
        model,
    })
}

struct Loop<'a> {
    train: &'a [FeatureVector],
    valid: &'a [FeatureVector],
    encoder: &'a Encoder,
    schedule: &'a ReductionSchedule,
    stored: Candidate,
    stored_hash: String,
    steps: Vec<ReductionStep>,
}

impl Loop<'_> {
    fn record(&mut self, kind: StepKind, c: &Candidate, reference: f64, accepted: bool, reason: String) {
        let cfg = &c.model.config;
        self.steps.push(ReductionStep {
            kind,
            n_trees: cfg.forest.n_trees,
            intermediate_hidden: cfg.intermediate_mlp.hidden.clone(),
            meta_hidden: cfg.meta_mlp.hidden.clone(),
            accuracy: c.accuracy,
            reference_accuracy: reference,
            roc_auc: c.roc_auc,
            forest_accuracy: c.forest_accuracy,
            forest_roc_auc: c.forest_roc_auc,
            inference: c.inference,
            parameter_count: c.model.parameter_count(),
            accepted,
            reason,
            stored_model_sha256: self.stored_hash.clone(),
        });
    }

    /// Retrains at `config`, then keeps the result iff it passes the gate.
    fn propose(&mut self, kind: StepKind, config: StackConfig) -> Result<bool> {
        let model = train_super_learner(self.train, self.encoder.clone(), &config)?;
        let candidate = evaluate_candidate(model, self.valid, self.schedule.timing_repetitions)?;
        let reference = self.stored.accuracy;
        let drop = reference - candidate.accuracy;
        let accepted = self.schedule.admits(reference, candidate.accuracy);
        let reason = if accepted {
            format!("accuracy change {:+.3} points within gate {}", -drop, self.schedule.gate)
        } else {
            format!("accuracy drop {drop:.3} points exceeds gate {}", self.schedule.gate)
        };
        if accepted {
            self.stored_hash = sha256_hex(&model_to_json(&candidate.model)?);
            self.record(kind, &candidate, reference, true, reason);
            self.stored = candidate;
        } else {
            self.record(kind, &candidate, reference, false, reason);
        }
        Ok(accepted)
    }

    fn shrink_forest(&mut self, notes: &mut Vec<String>) -> Result<()> {
        for &size in &self.schedule.forest_sizes {
            let current = self.stored.model.config.forest.n_trees;
            if size >= current {
                continue;
            }
            let config = reduce_forest(&self.stored.model.config, size);
            if !self.propose(StepKind::Forest, config)? {
                notes.push(format!("forest reduction stopped at {current} trees"));
                return Ok(());
            }
        }
        Ok(())
    }

    /// Round-robin over hidden layers, one decrement per step; a layer
    /// leaves the rotation at its first rejection or at the minimum size.
    fn shrink_mlp(&mut self, stage: MlpStage, notes: &mut Vec<String>) -> Result<()> {
        let hidden = |c: &StackConfig| match stage {
            MlpStage::Intermediate => c.intermediate_mlp.hidden.clone(),
            MlpStage::Meta => c.meta_mlp.hidden.clone(),
        };
        let min = self.schedule.mlp_min_size;
        let mut active: Vec<bool> = hidden(&self.stored.model.config).iter().map(|&h| h > min).collect();
        while active.iter().any(|&a| a) {
            for layer in 0..active.len() {
                if !active[layer] {
                    continue;
                }
                let mut sizes = hidden(&self.stored.model.config);
                sizes[layer] = sizes[layer].saturating_sub(self.schedule.mlp_step).max(min);
                let config = reduce_mlp(&self.stored.model.config, stage, &sizes);
                let accepted = self.propose(StepKind::Mlp { stage, layer }, config)?;
                if !accepted || sizes[layer] <= min {
                    active[layer] = false;
                }
            }
        }
        notes.push(format!("{stage:?} mlp settled at {:?}", hidden(&self.stored.model.config)).to_lowercase());
        Ok(())
    }
}

/// Accuracy-gated model reduction followed by dead-node pruning.
///
/// 1. Train the stack at `config` and evaluate it on `valid`; this is the
///    first stored model.
/// 2. Propose a smaller configuration and retrain the whole stack at it.
/// 3. If validation accuracy dropped by no more than `schedule.gate`
///    points relative to the stored model, store the candidate; otherwise
///    keep the stored model.
/// 4. Repeat over the forest sizes, then over the MLP hidden layers (or the
///    reverse when `forest_first` is false).
/// 5. Prune dead MLP units from the stored model without retraining.
pub fn feature_reduction_loop(
    train: &[FeatureVector],
    valid: &[FeatureVector],
    encoder: &Encoder,
    config: &StackConfig,
    schedule: &ReductionSchedule,
) -> Result<(SuperLearnerModel, ReductionReport)> {
    schedule.validate()?;
    if valid.is_empty() {
        return Err(Error::Data("validation set is empty".into()));
    }
    let baseline = train_super_learner(train, encoder.clone(), config)?;
    let baseline = evaluate_candidate(baseline, valid, schedule.timing_repetitions)?;
    let baseline_accuracy = baseline.accuracy;
    let stored_hash = sha256_hex(&model_to_json(&baseline.model)?);
    let mut lp = Loop {
        train,
        valid,
        encoder,
        schedule,
        stored: baseline,
        stored_hash,
        steps: Vec::new(),
    };
    let c = Candidate {
        model: lp.stored.model.clone(),
        ..lp.stored
    };
    lp.record(StepKind::Baseline, &c, baseline_accuracy, true, "first model".into());

    let mut notes = Vec::new();
    if schedule.forest_first {
        lp.shrink_forest(&mut notes)?;
    }
    for &stage in &schedule.mlp_stages {
        lp.shrink_mlp(stage, &mut notes)?;
    }
    if !schedule.forest_first {
        lp.shrink_forest(&mut notes)?;
    }
    notes.push("schedule exhausted; returning last accepted model".into());

    let pruned = prune_super_learner(&lp.stored.model)?;
    let model = pruned.model;
    let cfg = &model.config;
    let report = ReductionReport {
        gate: schedule.gate,
        baseline_accuracy,
        final_n_trees: cfg.forest.n_trees,
        final_intermediate_hidden: model.intermediate.mlp.hidden_sizes(),
        final_meta_hidden: model.meta.hidden_sizes(),
        final_accuracy: lp.stored.accuracy,
        final_parameter_count: model.parameter_count(),
        intermediate_pruning: Some(pruned.intermediate),
        meta_pruning: Some(pruned.meta),
        steps: lp.steps,
        notes,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        ReductionSchedule::default().validate().unwrap();
        let bad = ReductionSchedule {
            forest_sizes: vec![10, 20],
            ..ReductionSchedule::default()
        };
        assert!(bad.validate().is_err());
        let bad = ReductionSchedule {
            gate: 0.0,
            ..ReductionSchedule::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn gate_rule() {
        let s = ReductionSchedule::default();
        assert!(s.admits(99.0, 98.5));
        assert!(s.admits(99.0, 99.7));
        assert!(!s.admits(99.0, 96.0));
        assert!(!s.admits(99.0, 98.4));
    }

    #[test]
    fn reduce_forest_only_touches_tree_count() {
        let c = StackConfig::default();
        let r = reduce_forest(&c, 30);
        assert_eq!(r.forest.n_trees, 30);
        assert_eq!(StackConfig { forest: c.forest, ..r }, c);
    }
}
