use serde::{Deserialize, Serialize};

use super::{sigmoid, Classifier, Samples, Standardizer};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 300,
        }
    }
}

/// `p1 = sigmoid(bias + Σ weights[i] * x[i])` over raw (unstandardized)
/// inputs; the training-time standardization is folded into the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegressionModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticRegressionModel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    /// Logit accumulated in input order, starting from the bias.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut z = self.bias;
        for (w, v) in self.weights.iter().zip(x) {
            z += w * v;
        }
        z
    }

    /// Mean binary cross-entropy on `samples`.
    pub fn log_loss(&self, samples: &Samples) -> f64 {
        let mut total = 0.0;
        for (i, row) in samples.rows().enumerate() {
            total += logistic_loss(self.logit(row), samples.label(i));
        }
        total / samples.len() as f64
    }
}

/// `-log p(label)` computed from the logit without overflow.
fn logistic_loss(z: f64, label: u8) -> f64 {
    // log(1 + e^z) - y z
    let softplus = if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    softplus - f64::from(label) * z
}

impl Classifier for LogisticRegressionModel {
    fn input_dim(&self) -> usize {
        self.weights.len()
    }

    fn proba(&self, x: &[f64]) -> [f64; 2] {
        let p1 = sigmoid(self.logit(x));
        [1.0 - p1, p1]
    }
}

/// Full-batch gradient descent on the mean log loss over standardized
/// features. Returns the model and the training loss before each epoch plus
/// the final loss (`epochs + 1` values).
pub fn train_logreg_with_history(
    samples: &Samples,
    params: &LogRegParams,
    _seed: u64,
) -> Result<(LogisticRegressionModel, Vec<f64>)> {
    samples.require_both_classes()?;
    let scaler = Standardizer::fit(samples);
    let z = scaler.apply(samples);
    let d = z.n_features();
    let n = z.len() as f64;
    let mut model = LogisticRegressionModel::zeros(d);
    let mut history = Vec::with_capacity(params.epochs + 1);
    let mut grad = vec![0.0; d];
    for _ in 0..params.epochs {
        history.push(model.log_loss(&z));
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (i, row) in z.rows().enumerate() {
            let err = sigmoid(model.logit(row)) - f64::from(z.label(i));
            for (g, x) in grad.iter_mut().zip(row) {
                *g += err * x;
            }
            grad_b += err;
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= params.learning_rate * g / n;
        }
        model.bias -= params.learning_rate * grad_b / n;
    }
    history.push(model.log_loss(&z));

    // fold (x - mean) / scale into the weights
    let mut bias = model.bias;
    let mut weights = Vec::with_capacity(d);
    for j in 0..d {
        let w = model.weights[j] / scaler.scale[j];
        bias -= w * scaler.mean[j];
        weights.push(w);
    }
    Ok((LogisticRegressionModel { weights, bias }, history))
}

pub fn train_logreg(
    samples: &Samples,
    params: &LogRegParams,
    seed: u64,
) -> Result<LogisticRegressionModel> {
    train_logreg_with_history(samples, params, seed).map(|(m, _)| m)
}
