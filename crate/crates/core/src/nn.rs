//! A small dense-network kernel: forward pass, softmax cross-entropy,
//! backpropagation, Adam and a finite-difference gradient check.
//!
//! Weights are stored input-major: the `out_dim` weights fanning out of input
//! unit `c` are contiguous at `weights[c * out_dim..]`. One-hot inputs are
//! passed by index, so the first layer reads (and writes gradients into) a
//! single contiguous block, which keeps vocabulary-sized inputs cheap.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("target {target} out of range for {classes} classes")]
    TargetOutOfRange { target: usize, classes: usize },
    #[error("parameter and gradient shapes differ")]
    ShapeMismatch,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
}

/// Smallest probability fed to the log in the cross-entropy.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Input-major: `weights[c * out_dim + r]` connects input `c` to output `r`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            in_dim,
            out_dim,
            weights,
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    /// Weight from input `col` to output `row`.
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[col * self.out_dim + row]
    }

    pub fn set_weight(&mut self, row: usize, col: usize, value: f64) {
        self.weights[col * self.out_dim + row] = value;
    }

    fn fan_out(&self, col: usize) -> &[f64] {
        &self.weights[col * self.out_dim..(col + 1) * self.out_dim]
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Dense(&'a [f64]),
    OneHot(usize),
}

impl Input<'_> {
    fn dim_check(&self, expected: usize) -> Result<(), NnError> {
        match *self {
            Input::Dense(x) if x.len() != expected => Err(NnError::DimensionMismatch {
                expected,
                got: x.len(),
            }),
            Input::OneHot(i) if i >= expected => Err(NnError::DimensionMismatch {
                expected,
                got: i + 1,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<DenseLayer>,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        if layers.is_empty() {
            return Err(NnError::InvalidNetwork("no layers".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim == 0 || layer.out_dim == 0 {
                return Err(NnError::InvalidNetwork(format!("layer {i} has a zero dimension")));
            }
            if layer.weights.len() != layer.in_dim * layer.out_dim || layer.bias.len() != layer.out_dim {
                return Err(NnError::InvalidNetwork(format!("layer {i} buffers do not match its dims")));
            }
            if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(NnError::InvalidNetwork(format!("layer {i} holds non-finite values")));
            }
            if layer.activation == Activation::Softmax && i + 1 != layers.len() {
                return Err(NnError::InvalidNetwork("softmax is only supported on the output layer".into()));
            }
            if i > 0 && layers[i - 1].out_dim != layer.in_dim {
                return Err(NnError::InvalidNetwork(format!(
                    "layer {} outputs {} but layer {i} expects {}",
                    i - 1,
                    layers[i - 1].out_dim,
                    layer.in_dim
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialised network with the given layer widths (`dims` has one
    /// more entry than `activations`).
    pub fn glorot<R: Rng>(dims: &[usize], activations: &[Activation], rng: &mut R) -> Result<Self, NnError> {
        if dims.len() != activations.len() + 1 {
            return Err(NnError::InvalidNetwork("need one activation per layer".into()));
        }
        let layers = dims
            .windows(2)
            .zip(activations)
            .map(|(w, &act)| DenseLayer::glorot(w[0], w[1], act, rng))
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Layer widths from input to output.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Parameter tensors in `[w0, b0, w1, b1, ...]` order.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        let mut ws = Workspace::new(self);
        self.forward_into(Input::Dense(input), &mut ws)?;
        Ok(ws.output().to_vec())
    }

    pub fn forward_one_hot(&self, index: usize) -> Result<Vec<f64>, NnError> {
        let mut ws = Workspace::new(self);
        self.forward_into(Input::OneHot(index), &mut ws)?;
        Ok(ws.output().to_vec())
    }

    /// Runs the forward pass, leaving pre-activations and activations in `ws`.
    pub fn forward_into(&self, input: Input<'_>, ws: &mut Workspace) -> Result<(), NnError> {
        input.dim_check(self.input_dim())?;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.post.split_at_mut(l);
            let pre = &mut ws.pre[l];
            match (l, input) {
                (0, Input::OneHot(idx)) => {
                    for ((z, w), b) in pre.iter_mut().zip(layer.fan_out(idx)).zip(&layer.bias) {
                        *z = w + b;
                    }
                }
                _ => {
                    let x: &[f64] = if l == 0 {
                        match input {
                            Input::Dense(x) => x,
                            Input::OneHot(_) => unreachable!(),
                        }
                    } else {
                        &before[l - 1]
                    };
                    pre.copy_from_slice(&layer.bias);
                    for (c, &xc) in x.iter().enumerate() {
                        if xc != 0.0 {
                            axpy(xc, layer.fan_out(c), pre);
                        }
                    }
                }
            }
            let out = &mut after[0];
            match layer.activation {
                Activation::Relu => {
                    for (o, &z) in out.iter_mut().zip(pre.iter()) {
                        *o = if z > 0.0 { z } else { 0.0 };
                    }
                }
                Activation::Identity => out.copy_from_slice(pre),
                Activation::Softmax => ws.log_sum_exp = softmax_into(pre, out),
            }
        }
        Ok(())
    }

    /// Cross-entropy of `target` after a forward pass through `ws`.
    fn loss_from(&self, ws: &Workspace, target: usize) -> f64 {
        let logits = &ws.pre[self.layers.len() - 1];
        (ws.log_sum_exp - logits[target]).min(-PROB_FLOOR.ln())
    }

    fn check_loss_target(&self, target: usize) -> Result<(), NnError> {
        if self.layers[self.layers.len() - 1].activation != Activation::Softmax {
            return Err(NnError::InvalidNetwork("cross-entropy needs a softmax output layer".into()));
        }
        if target >= self.output_dim() {
            return Err(NnError::TargetOutOfRange {
                target,
                classes: self.output_dim(),
            });
        }
        Ok(())
    }

    pub fn loss(&self, input: Input<'_>, target: usize) -> Result<f64, NnError> {
        self.check_loss_target(target)?;
        let mut ws = Workspace::new(self);
        self.forward_into(input, &mut ws)?;
        Ok(self.loss_from(&ws, target))
    }

    /// Loss `-ln p_target` and its exact gradient for one example. `target`
    /// is a 0-based class index.
    pub fn loss_and_gradients(&self, input: Input<'_>, target: usize) -> Result<(f64, Gradients), NnError> {
        let mut grads = Gradients::zeros_like(self);
        let mut ws = Workspace::new(self);
        let loss = self.accumulate_gradients(input, target, 1.0, &mut grads, &mut ws)?;
        Ok((loss, grads))
    }

    /// Adds `scale * dLoss/dParams` for one example into `grads`; returns the loss.
    pub fn accumulate_gradients(
        &self,
        input: Input<'_>,
        target: usize,
        scale: f64,
        grads: &mut Gradients,
        ws: &mut Workspace,
    ) -> Result<f64, NnError> {
        self.check_loss_target(target)?;
        self.forward_into(input, ws)?;
        let loss = self.loss_from(ws, target);

        let last = self.layers.len() - 1;
        ws.delta.clear();
        ws.delta.extend(ws.post[last].iter().map(|p| p * scale));
        ws.delta[target] -= scale;

        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for (g, d) in gb.iter_mut().zip(&ws.delta) {
                *g += d;
            }
            match (l, input) {
                (0, Input::OneHot(idx)) => {
                    let out = layer.out_dim;
                    axpy(1.0, &ws.delta, &mut gw[idx * out..(idx + 1) * out]);
                }
                _ => {
                    let x: &[f64] = if l == 0 {
                        match input {
                            Input::Dense(x) => x,
                            Input::OneHot(_) => unreachable!(),
                        }
                    } else {
                        &ws.post[l - 1]
                    };
                    let out = layer.out_dim;
                    for (c, &xc) in x.iter().enumerate() {
                        if xc != 0.0 {
                            axpy(xc, &ws.delta, &mut gw[c * out..(c + 1) * out]);
                        }
                    }
                }
            }
            if l == 0 {
                break;
            }
            // propagate into the previous layer's pre-activations
            let relu = match self.layers[l - 1].activation {
                Activation::Relu => true,
                Activation::Identity => false,
                Activation::Softmax => unreachable!("validated in Network::new"),
            };
            ws.delta_prev.clear();
            ws.delta_prev.extend((0..layer.in_dim).map(|c| {
                if relu && ws.pre[l - 1][c] <= 0.0 {
                    0.0
                } else {
                    dot(layer.fan_out(c), &ws.delta)
                }
            }));
            std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
        }
        Ok(loss)
    }

    /// Index of the largest output; ties go to the lowest index.
    pub fn predict_one_hot(&self, index: usize, ws: &mut Workspace) -> Result<usize, NnError> {
        self.forward_into(Input::OneHot(index), ws)?;
        Ok(argmax(ws.output()))
    }
}

/// Reusable forward/backward buffers for one network shape.
#[derive(Debug, Clone)]
pub struct Workspace {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
    log_sum_exp: f64,
}

impl Workspace {
    pub fn new(network: &Network) -> Self {
        let pre: Vec<Vec<f64>> = network.layers.iter().map(|l| vec![0.0; l.out_dim]).collect();
        Self {
            post: pre.clone(),
            pre,
            delta: Vec::new(),
            delta_prev: Vec::new(),
            log_sum_exp: 0.0,
        }
    }

    pub fn output(&self) -> &[f64] {
        &self.post[self.post.len() - 1]
    }

    /// Pre-activations of layer `l` from the last forward pass.
    pub fn pre_activation(&self, l: usize) -> &[f64] {
        &self.pre[l]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(network: &Network) -> Self {
        Self {
            weights: network.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: network.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn clear(&mut self) {
        for t in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            t.fill(0.0);
        }
    }

    /// Tensors in the same `[w0, b0, w1, b1, ...]` order as `Network::params`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Writes the softmax of `logits` into `out` and returns their log-sum-exp.
fn softmax_into(logits: &[f64], out: &mut [f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    let inv = 1.0 / sum;
    for o in out.iter_mut() {
        *o *= inv;
    }
    max + sum.ln()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; logits.len()];
    softmax_into(logits, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Cap on training occurrences per probe; `None` trains on everything.
    pub max_train_tokens: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 100,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            max_train_tokens: Some(50_000),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |msg: &str| Err(NnError::InvalidConfig(msg.to_string()));
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning_rate must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad("epsilon must be non-negative");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be at least 1");
        }
        if self.max_train_tokens == Some(0) {
            return bad("max_train_tokens must be positive when set");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
}

impl AdamState {
    pub fn for_shapes(shapes: &[usize]) -> Self {
        let zeros: Vec<Vec<f64>> = shapes.iter().map(|&n| vec![0.0; n]).collect();
        Self {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step_count: 0,
        }
    }

    pub fn for_network(network: &Network) -> Self {
        let shapes: Vec<usize> = network.params().iter().map(|t| t.len()).collect();
        Self::for_shapes(&shapes)
    }
}

/// One bias-corrected Adam update over matching parameter/gradient tensors.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<(), NnError> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(NnError::ShapeMismatch);
    }
    let shapes_ok = params
        .iter()
        .zip(grads)
        .zip(&state.first_moment)
        .all(|((p, g), m)| p.len() == g.len() && p.len() == m.len());
    if !shapes_ok {
        return Err(NnError::ShapeMismatch);
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (config.beta1, config.beta2);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);
    let lr = config.learning_rate;
    let eps = config.epsilon;

    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        for (((pi, &gi), mi), vi) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = b1 * *mi + (1.0 - b1) * gi;
            *vi = b2 * *vi + (1.0 - b2) * gi * gi;
            let m_hat = *mi / bc1;
            let v_hat = *vi / bc2;
            *pi -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingResult {
    pub final_accuracy: f64,
    pub loss_per_epoch: Vec<f64>,
    pub epochs_run: usize,
}

impl TrainingResult {
    pub fn final_loss(&self) -> f64 {
        self.loss_per_epoch.last().copied().unwrap_or(f64::NAN)
    }
}

/// Example pairs `(one-hot input index, target class)`.
pub type Example = (u32, u32);

/// Mini-batch Adam training. Each epoch shuffles with a generator seeded from
/// `config.seed`; gradients are averaged within a batch. Identical examples in
/// a batch are evaluated once and weighted by multiplicity, visiting them in
/// sorted order so the summation order is fixed.
pub fn train(network: &mut Network, examples: &[Example], config: &TrainConfig) -> Result<TrainingResult, NnError> {
    config.validate()?;
    if examples.is_empty() {
        return Err(NnError::EmptyTrainingSet);
    }
    for &(input, target) in examples {
        Input::OneHot(input as usize).dim_check(network.input_dim())?;
        network.check_loss_target(target as usize)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut order: Vec<Example> = examples.to_vec();
    let mut grads = Gradients::zeros_like(network);
    let mut ws = Workspace::new(network);
    let mut adam = AdamState::for_network(network);
    let mut batch: Vec<Example> = Vec::with_capacity(config.batch_size);
    let mut loss_per_epoch = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend_from_slice(chunk);
            batch.sort_unstable();
            grads.clear();
            let inv = 1.0 / chunk.len() as f64;
            let mut i = 0;
            while i < batch.len() {
                let ex = batch[i];
                let mut j = i + 1;
                while j < batch.len() && batch[j] == ex {
                    j += 1;
                }
                let count = (j - i) as f64;
                let loss = network.accumulate_gradients(
                    Input::OneHot(ex.0 as usize),
                    ex.1 as usize,
                    count * inv,
                    &mut grads,
                    &mut ws,
                )?;
                epoch_loss += count * loss;
                i = j;
            }
            adam_step(&mut network.params_mut(), &grads.tensors(), &mut adam, config)?;
        }
        let mean_loss = epoch_loss / examples.len() as f64;
        if !mean_loss.is_finite() {
            return Err(NnError::InvalidNetwork("training diverged to a non-finite loss".into()));
        }
        loss_per_epoch.push(mean_loss);
    }

    let final_accuracy = example_accuracy(network, examples, &mut ws)?;
    Ok(TrainingResult {
        final_accuracy,
        epochs_run: loss_per_epoch.len(),
        loss_per_epoch,
    })
}

pub(crate) const INIT_STREAM: u64 = 0;
pub(crate) const SHUFFLE_STREAM: u64 = 1;

/// Fraction of examples whose argmax prediction equals the target, computed
/// once per distinct example and weighted by multiplicity.
fn example_accuracy(network: &Network, examples: &[Example], ws: &mut Workspace) -> Result<f64, NnError> {
    let mut sorted = examples.to_vec();
    sorted.sort_unstable();
    let mut correct = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let ex = sorted[i];
        let j = i + sorted[i..].iter().take_while(|&&e| e == ex).count();
        if network.predict_one_hot(ex.0 as usize, ws)? == ex.1 as usize {
            correct += j - i;
        }
        i = j;
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Max relative error between analytic and central-difference gradients over
/// every parameter: `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn numerical_gradient_check(network: &Network, input: Input<'_>, target: usize, h: f64) -> Result<f64, NnError> {
    if h.is_nan() || h <= 0.0 {
        return Err(NnError::InvalidConfig(format!("step h must be positive, got {h}")));
    }
    let (_, analytic) = network.loss_and_gradients(input, target)?;
    let analytic = analytic.tensors().concat();
    let mut probe = network.clone();
    let mut worst: f64 = 0.0;
    let mut flat = 0;
    let tensor_count = probe.params().len();
    for t in 0..tensor_count {
        let len = probe.params()[t].len();
        for i in 0..len {
            let orig = probe.params()[t][i];
            probe.params_mut()[t][i] = orig + h;
            let plus = probe.loss(input, target)?;
            probe.params_mut()[t][i] = orig - h;
            let minus = probe.loss(input, target)?;
            probe.params_mut()[t][i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[flat];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(err);
            flat += 1;
        }
    }
    Ok(worst)
}

/// Versioned JSON snapshot of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub dims: Vec<usize>,
    pub activations: Vec<Activation>,
    /// Row-major `out x in` per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl From<&Network> for Checkpoint {
    fn from(net: &Network) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            dims: net.dims(),
            activations: net.layers.iter().map(|l| l.activation).collect(),
            weights: net
                .layers
                .iter()
                .map(|l| {
                    (0..l.out_dim)
                        .flat_map(|r| (0..l.in_dim).map(move |c| l.weight(r, c)))
                        .collect()
                })
                .collect(),
            biases: net.layers.iter().map(|l| l.bias.clone()).collect(),
        }
    }
}

impl TryFrom<Checkpoint> for Network {
    type Error = NnError;

    fn try_from(c: Checkpoint) -> Result<Self, Self::Error> {
        if c.version != CHECKPOINT_VERSION {
            return Err(NnError::InvalidNetwork(format!("unsupported checkpoint version {}", c.version)));
        }
        let n = c.activations.len();
        if c.dims.len() != n + 1 || c.weights.len() != n || c.biases.len() != n {
            return Err(NnError::InvalidNetwork("checkpoint arrays disagree in length".into()));
        }
        let mut layers = Vec::with_capacity(n);
        for i in 0..n {
            let (in_dim, out_dim) = (c.dims[i], c.dims[i + 1]);
            let rows = &c.weights[i];
            if rows.len() != in_dim * out_dim {
                return Err(NnError::InvalidNetwork(format!("layer {i} weight count is wrong")));
            }
            let mut layer = DenseLayer::zeros(in_dim, out_dim, c.activations[i]);
            for r in 0..out_dim {
                for col in 0..in_dim {
                    layer.set_weight(r, col, rows[r * in_dim + col]);
                }
            }
            layer.bias = c.biases[i].clone();
            layers.push(layer);
        }
        Network::new(layers)
    }
}

pub fn save_checkpoint(network: &Network, path: &Path) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer(std::io::BufWriter::new(file), &Checkpoint::from(network))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Network, Box<dyn std::error::Error + Send + Sync>> {
    let file = std::fs::File::open(path)?;
    let c: Checkpoint = serde_json::from_reader(std::io::BufReader::new(file))?;
    Ok(Network::try_from(c)?)
}

/// Writes `epoch,mean_loss` rows (1-based epochs).
pub fn write_loss_curve<W: Write>(result: &TrainingResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "mean_loss"])?;
    for (i, loss) in result.loss_per_epoch.iter().enumerate() {
        w.write_record([(i + 1).to_string(), loss.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Builds a seeded generator on the initialisation stream.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    rng
}
