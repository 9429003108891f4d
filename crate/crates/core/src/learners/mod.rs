//! The four weak learners, each producing a `[p0, p1]` class-probability pair.

mod forest;
mod logreg;
mod mlp;
mod tree;

pub use forest::{train_forest, ForestParams, RandomForestModel};
pub use logreg::{train_logreg, train_logreg_with_history, LogRegParams, LogisticRegressionModel};
pub use mlp::{
    train_mlp, Activation, DenseLayer, LayerGradient, MlpModel, MlpParams,
};
pub use tree::{train_tree, DecisionTreeModel, MaxFeatures, Node, TreeParams};

use crate::flowdata::{FeatureVector, FEATURE_COUNT};
use crate::{Error, Result};

/// A trained binary classifier with probability output.
pub trait Classifier {
    fn input_dim(&self) -> usize;

    /// Probabilities without the dimension check. `x.len()` must equal
    /// [`Classifier::input_dim`].
    fn proba(&self, x: &[f64]) -> [f64; 2];

    fn predict_proba(&self, x: &[f64]) -> Result<[f64; 2]> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.proba(x))
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

/// Argmax with ties going to class 0.
pub fn predicted_class(p: [f64; 2]) -> u8 {
    u8::from(p[1] > p[0])
}

/// Row-major training matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    data: Vec<f64>,
    n_features: usize,
    labels: Vec<u8>,
}

impl Samples {
    pub fn new(data: Vec<f64>, n_features: usize, labels: Vec<u8>) -> Result<Self> {
        if n_features == 0 || data.len() != n_features * labels.len() {
            return Err(Error::Data(format!(
                "{} values do not form {} rows of {n_features} features",
                data.len(),
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Data("labels must be 0 or 1".into()));
        }
        Ok(Self {
            data,
            n_features,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(Error::Data("ragged rows".into()));
        }
        Self::new(rows.concat(), n_features, labels.to_vec())
    }

    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        Self {
            data: vectors.iter().flat_map(|v| v.values).collect(),
            n_features: FEATURE_COUNT,
            labels: vectors.iter().map(|v| v.label).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_features)
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_counts(&self) -> [usize; 2] {
        self.labels.iter().fold([0, 0], |mut acc, &l| {
            acc[usize::from(l)] += 1;
            acc
        })
    }

    pub fn subset(&self, indices: &[usize]) -> Samples {
        let mut data = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Samples {
            data,
            n_features: self.n_features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Data("training set is empty".into()))
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        self.require_nonempty()?;
        if self.class_counts().contains(&0) {
            Err(Error::Data("training set needs both classes".into()))
        } else {
            Ok(())
        }
    }
}

/// Per-feature affine standardization `(x - mean) / scale`; zero-variance
/// features keep mean 0 and scale 1.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(samples: &Samples) -> Self {
        let d = samples.n_features();
        let n = samples.len() as f64;
        let mut mean = vec![0.0; d];
        for row in samples.rows() {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in samples.rows() {
            for ((v, &m), &x) in var.iter_mut().zip(&mean).zip(row) {
                *v += (x - m) * (x - m);
            }
        }
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let sd = (var[j] / n).sqrt();
            if sd > 1e-12 * mean[j].abs().max(1.0) {
                scale[j] = sd;
            } else {
                mean[j] = 0.0;
            }
        }
        Self { mean, scale }
    }

    pub fn apply(&self, samples: &Samples) -> Samples {
        let d = samples.n_features();
        let mut data = samples.data.clone();
        for row in data.chunks_exact_mut(d) {
            for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *x = (*x - m) / s;
            }
        }
        Samples {
            data,
            n_features: d,
            labels: samples.labels.clone(),
        }
    }
}

/// Numerically stable sigmoid with the exact expression the emitted C uses.
#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
