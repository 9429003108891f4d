//! Confusion rates, ROC/AUC, inference timing and model-size accounting.

mod report;
mod roc;
mod timing;

pub use report::{evaluate, model_size, EvalReport, ModelSize};
pub use roc::{roc_auc, RocCurve};
pub use timing::{time_inference, TimingStats};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default decision threshold on `p1`.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Fraction correct.
    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// `tp / (tp + fn)`; `None` without positives.
    pub fn tpr(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    /// `fp / (fp + tn)`; `None` without negatives.
    pub fn fpr(&self) -> Option<f64> {
        let n = self.fp + self.tn;
        (n > 0).then(|| self.fp as f64 / n as f64)
    }
}

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.is_empty() || scores.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "need equally many scores and labels, got {} and {}",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Counts at `threshold`; an example is predicted malicious iff
/// `score > threshold`.
pub fn confusion(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionMatrix> {
    check_inputs(scores, labels)?;
    let mut m = ConfusionMatrix::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s > threshold, l != 0) {
            (true, true) => m.tp += 1,
            (true, false) => m.fp += 1,
            (false, false) => m.tn += 1,
            (false, true) => m.fn_ += 1,
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_correct_predictions() {
        let m = confusion(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!((m.tp, m.tn, m.fp, m.fn_), (1, 1, 0, 0));
        assert_eq!(m.accuracy(), 1.0);
    }

    #[test]
    fn all_negative_scores() {
        let m = confusion(&[0.0; 4], &[1, 1, 0, 0], 0.5).unwrap();
        assert_eq!(m.tpr(), Some(0.0));
        assert_eq!(m.fpr(), Some(0.0));
        assert_eq!(m.accuracy(), 0.5);
    }

    #[test]
    fn undefined_rates() {
        let m = confusion(&[0.7, 0.2], &[1, 1], 0.5).unwrap();
        assert_eq!(m.fpr(), None);
        assert_eq!(m.tpr(), Some(0.5));
        let m = confusion(&[0.7], &[0], 0.5).unwrap();
        assert_eq!(m.tpr(), None);
    }

    #[test]
    fn threshold_is_strict() {
        let m = confusion(&[0.5], &[1], 0.5).unwrap();
        assert_eq!(m.fn_, 1);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(confusion(&[0.5], &[1, 0], 0.5).is_err());
        assert!(confusion(&[], &[], 0.5).is_err());
    }
}
