//! Minimal dense feedforward network with explicit backpropagation.
//!
//! Everything is plain `f64` on flat buffers: the generators, discriminators,
//! and downstream MLP models in this crate are all small (a few thousand
//! parameters), and the DP training path needs per-example gradients, which
//! rules out batched matrix tricks anyway. Per-example gradients are obtained
//! by running backprop on microbatches of size one and keeping each result.

mod loss;
mod optimizer;

pub use loss::{BatchLoss, MseLoss, SoftmaxCrossEntropy};
pub use optimizer::{Optimizer, OptimizerKind};

use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Prng, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed in terms of the activation's *output* value.
    #[inline]
    pub fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow for large `x`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// One dense layer: `y = activation(W x + b)`, weights row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut sum = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                sum += w * x;
            }
            out.push(self.activation.apply(sum));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

/// Per-layer gradient (or accumulator) tensors mirroring a [`DenseNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<ParamBlock>,
}

/// Cached forward activations for one batch, consumed by the backward passes.
pub struct BatchTrace {
    /// `acts[i][0]` is example `i`'s input; `acts[i][l + 1]` the output of layer `l`.
    acts: Vec<Vec<Vec<f64>>>,
    outputs: Matrix,
}

impl BatchTrace {
    pub fn outputs(&self) -> &Matrix {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.acts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acts.is_empty()
    }
}

impl DenseNet {
    /// Builds a net with Glorot-uniform weights (`±sqrt(6/(in+out))`) and zero
    /// biases. `dims` lists all layer widths including input and output, so
    /// `activations.len()` must be `dims.len() - 1`.
    pub fn glorot(dims: &[usize], activations: &[Activation], rng: &mut Prng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config("net needs at least one layer".into()));
        }
        if activations.len() != dims.len() - 1 {
            return Err(Error::Config(format!(
                "{} activations given for {} layers",
                activations.len(),
                dims.len() - 1
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Config("layer widths must be > 0".into()));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (l, &act) in activations.iter().enumerate() {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let weights = (0..fan_in * fan_out).map(|_| dist.sample(rng)).collect();
            layers.push(Layer {
                in_dim: fan_in,
                out_dim: fan_out,
                activation: act,
                weights,
                biases: vec![0.0; fan_out],
            });
        }
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("net needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(Error::Schema(format!(
                    "layer dims do not chain: {} -> {}",
                    w[0].out_dim, w[1].in_dim
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Largest absolute parameter value across all weights and biases.
    pub fn max_abs_param(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()))
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn params_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.biases.iter()).all(|v| v.is_finite()))
    }

    fn check_batch(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Schema(format!(
                "batch has {} columns, net expects {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        if !batch.is_finite() {
            return Err(Error::Numeric("non-finite value in input batch".into()));
        }
        Ok(())
    }

    /// Plain forward pass for a batch of row vectors.
    pub fn forward(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_batch(batch)?;
        let mut out = Matrix::zeros(batch.rows(), self.output_dim());
        let mut cur = Vec::new();
        let mut next = Vec::new();
        for r in 0..batch.rows() {
            cur.clear();
            cur.extend_from_slice(batch.row(r));
            for layer in &self.layers {
                layer.forward_into(&cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
            out.row_mut(r).copy_from_slice(&cur);
        }
        Ok(out)
    }

    /// Forward pass that keeps every intermediate activation so gradients can
    /// be computed afterwards.
    pub fn forward_traced(&self, batch: &Matrix) -> Result<BatchTrace> {
        self.check_batch(batch)?;
        let mut acts = Vec::with_capacity(batch.rows());
        let mut outputs = Matrix::zeros(batch.rows(), self.output_dim());
        for r in 0..batch.rows() {
            let mut example = Vec::with_capacity(self.layers.len() + 1);
            example.push(batch.row(r).to_vec());
            for layer in &self.layers {
                let mut next = Vec::new();
                layer.forward_into(example.last().unwrap(), &mut next);
                example.push(next);
            }
            outputs.row_mut(r).copy_from_slice(example.last().unwrap());
            acts.push(example);
        }
        Ok(BatchTrace { acts, outputs })
    }

    /// Backprop for a single traced example. Returns the parameter gradients
    /// and the gradient with respect to the example's input (needed to chain
    /// a discriminator's gradient into a generator).
    fn backward_single(&self, example: &[Vec<f64>], d_output: &[f64]) -> (GradientSet, Vec<f64>) {
        let mut grads = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            grads.push(ParamBlock {
                weights: vec![0.0; layer.weights.len()],
                biases: vec![0.0; layer.out_dim],
            });
        }
        let mut d_out = d_output.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let y = &example[l + 1];
            let x = &example[l];
            let block = &mut grads[l];
            let mut d_in = vec![0.0; layer.in_dim];
            for o in 0..layer.out_dim {
                let dz = d_out[o] * layer.activation.grad_from_output(y[o]);
                block.biases[o] = dz;
                let row = o * layer.in_dim;
                for i in 0..layer.in_dim {
                    block.weights[row + i] = dz * x[i];
                    d_in[i] += layer.weights[row + i] * dz;
                }
            }
            d_out = d_in;
        }
        (GradientSet { layers: grads }, d_out)
    }

    fn check_trace(&self, trace: &BatchTrace, d_outputs: &Matrix) -> Result<()> {
        if trace.is_empty() {
            return Err(Error::State("forward trace is empty".into()));
        }
        if trace.len() != d_outputs.rows() || d_outputs.cols() != self.output_dim() {
            return Err(Error::State(format!(
                "trace/gradient shape mismatch: trace {} examples, grads {}x{}",
                trace.len(),
                d_outputs.rows(),
                d_outputs.cols()
            )));
        }
        Ok(())
    }

    /// One gradient set per example, each for that example's own loss term.
    pub fn backward_per_example(
        &self,
        trace: &BatchTrace,
        d_outputs: &Matrix,
    ) -> Result<Vec<GradientSet>> {
        self.check_trace(trace, d_outputs)?;
        Ok(trace
            .acts
            .iter()
            .enumerate()
            .map(|(r, example)| self.backward_single(example, d_outputs.row(r)).0)
            .collect())
    }

    /// Whole-batch gradient: the sum of per-example gradients. For a mean
    /// loss, pass `d_outputs` already scaled by `1/m`.
    pub fn backward_batch(&self, trace: &BatchTrace, d_outputs: &Matrix) -> Result<GradientSet> {
        self.check_trace(trace, d_outputs)?;
        let mut total = GradientSet::zeros_like(self);
        for (r, example) in trace.acts.iter().enumerate() {
            let (g, _) = self.backward_single(example, d_outputs.row(r));
            total.add_assign(&g);
        }
        Ok(total)
    }

    /// Like [`backward_batch`](Self::backward_batch) but also returns the
    /// per-example input gradients.
    pub fn backward_batch_with_input_grads(
        &self,
        trace: &BatchTrace,
        d_outputs: &Matrix,
    ) -> Result<(GradientSet, Matrix)> {
        self.check_trace(trace, d_outputs)?;
        let mut total = GradientSet::zeros_like(self);
        let mut d_inputs = Matrix::zeros(trace.len(), self.input_dim());
        for (r, example) in trace.acts.iter().enumerate() {
            let (g, d_in) = self.backward_single(example, d_outputs.row(r));
            total.add_assign(&g);
            d_inputs.row_mut(r).copy_from_slice(&d_in);
        }
        Ok((total, d_inputs))
    }

    /// Input gradients only, skipping the parameter gradients. Used to chain
    /// a loss through this net into the net that produced its inputs.
    pub fn backward_input_grads(&self, trace: &BatchTrace, d_outputs: &Matrix) -> Result<Matrix> {
        self.check_trace(trace, d_outputs)?;
        let mut d_inputs = Matrix::zeros(trace.len(), self.input_dim());
        for (r, example) in trace.acts.iter().enumerate() {
            let mut d_out = d_outputs.row(r).to_vec();
            for (l, layer) in self.layers.iter().enumerate().rev() {
                let y = &example[l + 1];
                let mut d_in = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let dz = d_out[o] * layer.activation.grad_from_output(y[o]);
                    let row = o * layer.in_dim;
                    for i in 0..layer.in_dim {
                        d_in[i] += layer.weights[row + i] * dz;
                    }
                }
                d_out = d_in;
            }
            d_inputs.row_mut(r).copy_from_slice(&d_out);
        }
        Ok(d_inputs)
    }

    /// Clamps every weight and bias into `[-bound, bound]`.
    pub fn clip_weights(&mut self, bound: f64) -> Result<()> {
        if bound <= 0.0 {
            return Err(Error::Config(format!(
                "weight clip bound must be > 0, got {bound}"
            )));
        }
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = w.clamp(-bound, bound);
            }
        }
        Ok(())
    }
}

impl GradientSet {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| ParamBlock {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.out_dim],
                })
                .collect(),
        }
    }

    pub fn matches(&self, net: &DenseNet) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.biases.len() == l.out_dim)
    }

    pub fn add_assign(&mut self, other: &GradientSet) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for block in &mut self.layers {
            for x in block.weights.iter_mut().chain(block.biases.iter_mut()) {
                *x *= factor;
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let mut sq = 0.0;
        for block in &self.layers {
            for x in block.weights.iter().chain(block.biases.iter()) {
                sq += x * x;
            }
        }
        sq.sqrt()
    }

    /// Concatenates all tensors into one vector (layer order, weights before
    /// biases). Inverse of [`from_flat`](Self::from_flat).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for block in &self.layers {
            out.extend_from_slice(&block.weights);
            out.extend_from_slice(&block.biases);
        }
        out
    }

    pub fn from_flat(net: &DenseNet, flat: &[f64]) -> Result<Self> {
        if flat.len() != net.param_count() {
            return Err(Error::Schema(format!(
                "flat gradient has {} entries, net has {} parameters",
                flat.len(),
                net.param_count()
            )));
        }
        let mut layers = Vec::with_capacity(net.layers.len());
        let mut pos = 0;
        for l in &net.layers {
            let w_end = pos + l.weights.len();
            let b_end = w_end + l.out_dim;
            layers.push(ParamBlock {
                weights: flat[pos..w_end].to_vec(),
                biases: flat[w_end..b_end].to_vec(),
            });
            pos = b_end;
        }
        Ok(Self { layers })
    }
}

/// Compares backprop gradients against central finite differences.
///
/// Returns the maximum over parameters of
/// `|analytic - numeric| / (|analytic| + 1e-8)`.
pub fn finite_difference_check(
    net: &DenseNet,
    batch: &Matrix,
    loss: &dyn BatchLoss,
    h: f64,
) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::Config(format!("step size must be > 0, got {h}")));
    }
    let trace = net.forward_traced(batch)?;
    let d_outputs = loss.grad(trace.outputs());
    let analytic = net.backward_batch(&trace, &d_outputs)?;

    let mut probe = net.clone();
    let mut worst = 0.0_f64;
    for l in 0..net.layers.len() {
        let n_w = net.layers[l].weights.len();
        let n_b = net.layers[l].biases.len();
        for p in 0..n_w + n_b {
            let read = |probe: &DenseNet| {
                if p < n_w {
                    probe.layers[l].weights[p]
                } else {
                    probe.layers[l].biases[p - n_w]
                }
            };
            let write = |probe: &mut DenseNet, v: f64| {
                if p < n_w {
                    probe.layers[l].weights[p] = v;
                } else {
                    probe.layers[l].biases[p - n_w] = v;
                }
            };
            let orig = read(&probe);
            write(&mut probe, orig + h);
            let plus = loss.value(&probe.forward(batch)?);
            write(&mut probe, orig - h);
            let minus = loss.value(&probe.forward(batch)?);
            write(&mut probe, orig);

            let numeric = (plus - minus) / (2.0 * h);
            let a = if p < n_w {
                analytic.layers[l].weights[p]
            } else {
                analytic.layers[l].biases[p - n_w]
            };
            worst = worst.max((a - numeric).abs() / (a.abs() + 1e-8));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
