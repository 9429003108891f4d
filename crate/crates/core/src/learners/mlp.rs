//! Multilayer perceptron with ReLU (or sigmoid) hidden layers and a two-way
//! softmax output, trained by mini-batch backpropagation with Adam.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Classifier, Samples, Standardizer};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    /// Output layer only.
    Softmax,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => sigmoid(z),
            Activation::Softmax => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Softmax => 1.0,
        }
    }
}

/// Fully connected layer; `weights[j * n_in + i]` connects input `i` to
/// output `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(n_in: usize, n_out: usize, activation: Activation) -> Self {
        Self {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            biases: vec![0.0; n_out],
            activation,
        }
    }

    #[inline]
    pub fn weight(&self, out: usize, input: usize) -> f64 {
        self.weights[out * self.n_in + input]
    }

    /// Pre-activations, each accumulated from the bias in input order.
    #[inline]
    fn affine(&self, input: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate().take(self.n_out) {
            let row = &self.weights[j * self.n_in..(j + 1) * self.n_in];
            let mut z = self.biases[j];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            *o = z;
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

#[inline]
fn softmax2(z0: f64, z1: f64) -> [f64; 2] {
    let m = if z0 > z1 { z0 } else { z1 };
    let e0 = (z0 - m).exp();
    let e1 = (z1 - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<DenseLayer>,
}

/// Gradient of the mean loss with respect to one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl MlpModel {
    /// Builds a model from layers, checking shapes and activations.
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        let m = Self { layers };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Model(format!("mlp: {m}")));
        let Some(last) = self.layers.last() else {
            return bad("no layers".into());
        };
        if last.n_out != 2 || last.activation != Activation::Softmax {
            return bad("output layer must be a 2-way softmax".into());
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.n_in == 0 || layer.n_out == 0 {
                return bad(format!("layer {k} is empty"));
            }
            if layer.weights.len() != layer.n_in * layer.n_out || layer.biases.len() != layer.n_out {
                return bad(format!("layer {k} has inconsistent parameter arrays"));
            }
            if layer.weights.iter().chain(&layer.biases).any(|v| !v.is_finite()) {
                return bad(format!("layer {k} has non-finite parameters"));
            }
            if k + 1 < self.layers.len() {
                if layer.activation == Activation::Softmax {
                    return bad(format!("hidden layer {k} cannot use softmax"));
                }
                if self.layers[k + 1].n_in != layer.n_out {
                    return bad(format!("layer {k} output does not match layer {} input", k + 1));
                }
            }
        }
        Ok(())
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.n_out)
            .collect()
    }

    /// Widest layer, input included.
    pub fn max_width(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.n_in.max(l.n_out))
            .max()
            .unwrap_or(0)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::parameter_count).sum()
    }

    /// Output-layer pre-activations.
    pub fn logits(&self, x: &[f64]) -> [f64; 2] {
        let width = self.max_width();
        let mut a = x.to_vec();
        a.resize(width, 0.0);
        let mut b = vec![0.0; width];
        for layer in &self.layers {
            layer.affine(&a[..layer.n_in], &mut b[..layer.n_out]);
            if layer.activation != Activation::Softmax {
                for v in &mut b[..layer.n_out] {
                    *v = layer.activation.apply(*v);
                }
            }
            std::mem::swap(&mut a, &mut b);
        }
        [a[0], a[1]]
    }

    /// Mean cross-entropy and its gradient over the rows in `batch`.
    pub fn loss_and_gradient(&self, samples: &Samples, batch: &[usize]) -> (f64, Vec<LayerGradient>) {
        let mut grads: Vec<LayerGradient> = self
            .layers
            .iter()
            .map(|l| LayerGradient {
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
            })
            .collect();
        let mut loss = 0.0;
        let n_layers = self.layers.len();
        let mut pre: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.n_out]).collect();
        let mut post: Vec<Vec<f64>> = pre.clone();
        for &r in batch {
            let x = samples.row(r);
            let y = usize::from(samples.label(r));
            for k in 0..n_layers {
                let layer = &self.layers[k];
                let input: &[f64] = if k == 0 { x } else { &post[k - 1] };
                let mut z = std::mem::take(&mut pre[k]);
                layer.affine(input, &mut z);
                for (a, &zz) in post[k].iter_mut().zip(&z) {
                    *a = layer.activation.apply(zz);
                }
                pre[k] = z;
            }
            let z = &pre[n_layers - 1];
            let m = z[0].max(z[1]);
            let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
            loss += lse - z[y];
            let p = softmax2(z[0], z[1]);
            let mut delta = vec![p[0], p[1]];
            delta[y] -= 1.0;
            for k in (0..n_layers).rev() {
                let layer = &self.layers[k];
                let input: &[f64] = if k == 0 { x } else { &post[k - 1] };
                let g = &mut grads[k];
                for j in 0..layer.n_out {
                    g.biases[j] += delta[j];
                    let row = &mut g.weights[j * layer.n_in..(j + 1) * layer.n_in];
                    for (gw, a) in row.iter_mut().zip(input) {
                        *gw += delta[j] * a;
                    }
                }
                if k > 0 {
                    let below = &self.layers[k - 1];
                    let mut next = vec![0.0; layer.n_in];
                    for (i, nd) in next.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for (j, d) in delta.iter().enumerate() {
                            s += layer.weight(j, i) * d;
                        }
                        *nd = s * below.activation.derivative(pre[k - 1][i], post[k - 1][i]);
                    }
                    delta = next;
                }
            }
        }
        let n = batch.len() as f64;
        for g in &mut grads {
            g.weights.iter_mut().for_each(|v| *v /= n);
            g.biases.iter_mut().for_each(|v| *v /= n);
        }
        (loss / n, grads)
    }
}

impl Classifier for MlpModel {
    fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    fn proba(&self, x: &[f64]) -> [f64; 2] {
        let z = self.logits(x);
        softmax2(z[0], z[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// L1 penalty applied as a proximal (soft-threshold) step after each
    /// update. Drives unused connections to exactly zero.
    pub l1: f64,
}

impl MlpParams {
    pub fn with_hidden(hidden: &[usize]) -> Self {
        Self {
            hidden: hidden.to_vec(),
            ..Self::default()
        }
    }
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![5, 5],
            hidden_activation: Activation::Relu,
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 32,
            l1: 0.0,
        }
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, t: i32) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        let c1 = 1.0 - B1.powi(t);
        let c2 = 1.0 - B2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = B1 * *m + (1.0 - B1) * g;
            *v = B2 * *v + (1.0 - B2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
        }
    }
}

fn soft_threshold(params: &mut [f64], amount: f64) {
    for w in params {
        let shrunk = w.abs() - amount;
        *w = if shrunk > 0.0 { shrunk.copysign(*w) } else { 0.0 };
    }
}

/// Glorot-uniform initialized network for `n_in` inputs.
pub(crate) fn init_mlp(n_in: usize, params: &MlpParams, seed: u64) -> MlpModel {
    let mut rng = seed::derived_rng(seed, "mlp-init", 0);
    let mut sizes = vec![n_in];
    sizes.extend(&params.hidden);
    sizes.push(2);
    let factor = if params.hidden_activation == Activation::Sigmoid {
        2.0
    } else {
        6.0
    };
    let layers = sizes
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let activation = if k + 2 == sizes.len() {
                Activation::Softmax
            } else {
                params.hidden_activation
            };
            let bound = (factor / (w[0] + w[1]) as f64).sqrt();
            let mut layer = DenseLayer::zeros(w[0], w[1], activation);
            for v in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *v = rng.random_range(-bound..bound);
            }
            layer
        })
        .collect();
    MlpModel { layers }
}

/// Trains an MLP on standardized inputs and folds the standardization into
/// the first layer, so the returned model consumes raw features.
pub fn train_mlp(samples: &Samples, params: &MlpParams, seed: u64) -> Result<MlpModel> {
    samples.require_nonempty()?;
    if params.hidden.is_empty() || params.hidden.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "hidden sizes must be non-empty and positive, got {:?}",
            params.hidden
        )));
    }
    if params.hidden_activation == Activation::Softmax {
        return Err(Error::InvalidArgument("softmax is not a hidden activation".into()));
    }
    let scaler = Standardizer::fit(samples);
    let z = scaler.apply(samples);
    let mut model = init_mlp(z.n_features(), params, seed);
    let mut states: Vec<(AdamState, AdamState)> = model
        .layers
        .iter()
        .map(|l| (AdamState::new(l.weights.len()), AdamState::new(l.biases.len())))
        .collect();
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut rng = seed::derived_rng(seed, "mlp-batches", 0);
    let batch_size = params.batch_size.max(1);
    let mut t = 0;
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        for (batch_no, batch) in order.chunks(batch_size).enumerate() {
            let (loss, grads) = model.loss_and_gradient(&z, batch);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_no,
                });
            }
            t += 1;
            for ((layer, g), (sw, sb)) in model.layers.iter_mut().zip(&grads).zip(&mut states) {
                sw.step(&mut layer.weights, &g.weights, params.learning_rate, t);
                sb.step(&mut layer.biases, &g.biases, params.learning_rate, t);
                if params.l1 > 0.0 {
                    soft_threshold(&mut layer.weights, params.learning_rate * params.l1);
                }
            }
        }
    }

    let first = &mut model.layers[0];
    for j in 0..first.n_out {
        let mut b = first.biases[j];
        for i in 0..first.n_in {
            let w = first.weights[j * first.n_in + i] / scaler.scale[i];
            b -= w * scaler.mean[i];
            first.weights[j * first.n_in + i] = w;
        }
        first.biases[j] = b;
    }
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_output_layer_gives_half() {
        let mut m = init_mlp(3, &MlpParams::with_hidden(&[4]), 1);
        let last = m.layers.last_mut().unwrap();
        last.weights.iter_mut().for_each(|w| *w = 0.0);
        last.biases.iter_mut().for_each(|b| *b = 0.0);
        assert_eq!(m.proba(&[1.0, -2.0, 3.0]), [0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_hidden_sizes() {
        let s = Samples::from_rows(&[vec![0.0], vec![1.0]], &[0, 1]).unwrap();
        assert!(train_mlp(&s, &MlpParams::with_hidden(&[]), 0).is_err());
        assert!(train_mlp(&s, &MlpParams::with_hidden(&[2, 0]), 0).is_err());
    }

    #[test]
    fn validate_catches_shape_errors() {
        let mut m = init_mlp(3, &MlpParams::with_hidden(&[4]), 1);
        m.layers[1].n_in = 5;
        assert!(m.validate().is_err());
        let mut m = init_mlp(3, &MlpParams::with_hidden(&[4]), 1);
        m.layers[1].activation = Activation::Relu;
        assert!(m.validate().is_err());
    }

    #[test]
    fn same_seed_same_weights() {
        let data = Samples::from_vectors(&crate::flowdata::synth_generate(200, 0.5, 4));
        let p = MlpParams {
            epochs: 5,
            ..MlpParams::default()
        };
        let a = train_mlp(&data, &p, 9).unwrap();
        let b = train_mlp(&data, &p, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hidden_sizes(), vec![5, 5]);
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let s = Samples::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], &[0, 1, 0]).unwrap();
        let p = MlpParams {
            learning_rate: f64::INFINITY,
            epochs: 3,
            batch_size: 1,
            ..MlpParams::with_hidden(&[2])
        };
        match train_mlp(&s, &p, 0) {
            Err(Error::NonFiniteLoss { epoch, .. }) => assert!(epoch < 3),
            other => panic!("expected non-finite loss, got {other:?}"),
        }
    }

    #[test]
    fn soft_threshold_zeroes_small_weights() {
        let mut w = [0.5, -0.05, 0.05, -0.5];
        soft_threshold(&mut w, 0.1);
        assert_eq!(w, [0.4, 0.0, 0.0, -0.4]);
    }
}
