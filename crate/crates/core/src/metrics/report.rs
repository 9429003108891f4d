use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{confusion, roc_auc, time_inference, ConfusionMatrix, TimingStats, DEFAULT_THRESHOLD};
use crate::flowdata::FeatureVector;
use crate::stacker::{model_to_json, SuperLearnerModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSize {
    pub parameter_count: usize,
    pub serialized_bytes: usize,
}

pub fn model_size(model: &SuperLearnerModel) -> Result<ModelSize> {
    Ok(ModelSize {
        parameter_count: model.parameter_count(),
        serialized_bytes: model_to_json(model)?.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub examples: usize,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    /// Percent.
    pub accuracy: f64,
    /// Percent; `None` without malicious examples.
    pub tpr: Option<f64>,
    /// Percent; `None` without benign examples.
    pub fpr: Option<f64>,
    /// `None` unless both classes are present.
    pub roc_auc: Option<f64>,
    pub inference: TimingStats,
    pub size: ModelSize,
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

impl EvalReport {
    /// Row layout: model, inference duration, accuracy, TPR, FPR, AUC, size.
    pub fn table(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:>14} {:>12} {:>8} {:>8} {:>8} {:>12} {:>14}",
            "Model", "Inference", "Accuracy(%)", "TPR(%)", "FPR(%)", "ROC AUC", "Parameters", "Size (bytes)"
        );
        let _ = writeln!(
            s,
            "{:<16} {:>14} {:>12.2} {:>8} {:>8} {:>8} {:>12} {:>14}",
            name,
            format!("{:.3?}", self.inference.best_total),
            self.accuracy,
            pct(self.tpr),
            pct(self.fpr),
            self.roc_auc.map_or_else(|| "n/a".into(), |a| format!("{a:.4}")),
            self.size.parameter_count,
            self.size.serialized_bytes,
        );
        s
    }
}

/// Scores `data` with the full stack and collects every metric.
pub fn evaluate(model: &SuperLearnerModel, data: &[FeatureVector], repetitions: usize) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::Data("evaluation set is empty".into()));
    }
    let mut scores = Vec::with_capacity(data.len());
    for v in data {
        scores.push(model.predict_proba(&v.values)?[1]);
    }
    let labels: Vec<u8> = data.iter().map(|v| v.label).collect();
    let cm = confusion(&scores, &labels, DEFAULT_THRESHOLD)?;
    let auc = roc_auc(&scores, &labels).ok().map(|r| r.auc);
    let inference = time_inference(data, repetitions, |v| model.proba_unchecked(&v.values));
    Ok(EvalReport {
        examples: data.len(),
        threshold: DEFAULT_THRESHOLD,
        accuracy: 100.0 * cm.accuracy(),
        tpr: cm.tpr().map(|r| 100.0 * r),
        fpr: cm.fpr().map(|r| 100.0 * r),
        confusion: cm,
        roc_auc: auc,
        inference,
        size: model_size(model)?,
    })
}
