//! RMSProp and Adam, both as plain descent steps.
//!
//! A caller that wants ascent (the WGAN critic maximizes its objective)
//! passes the gradient of the negated objective; for both optimizers that is
//! exactly the sign-flipped step.

use serde::{Deserialize, Serialize};

use super::{DenseNet, GradientSet, ParamBlock};
use crate::{Error, Result};

/// Denominator stabilizer in both update rules.
pub const NUMERIC_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    RmsProp { decay: f64 },
    Adam { beta1: f64, beta2: f64 },
}

impl OptimizerKind {
    /// RMSProp with decay 0.9, the WGAN-family default.
    pub fn rmsprop() -> Self {
        OptimizerKind::RmsProp { decay: 0.9 }
    }

    /// Adam with betas (0.9, 0.999).
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    step: u64,
    /// Decayed squared-gradient accumulator (RMSProp) / second moment (Adam).
    second: Vec<ParamBlock>,
    /// First moment, Adam only.
    first: Option<Vec<ParamBlock>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64, net: &DenseNet) -> Self {
        let zeros = GradientSet::zeros_like(net).layers;
        let first = match kind {
            OptimizerKind::Adam { .. } => Some(zeros.clone()),
            OptimizerKind::RmsProp { .. } => None,
        };
        Self {
            kind,
            learning_rate,
            step: 0,
            second: zeros,
            first,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// Applies one descent update `w -= lr * g_hat` in place.
    pub fn step(&mut self, net: &mut DenseNet, grads: &GradientSet) -> Result<()> {
        if !grads.matches(net) {
            return Err(Error::Schema(
                "gradient shapes do not mirror net parameters".into(),
            ));
        }
        self.step += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::RmsProp { decay } => {
                for (l, layer) in net.layers_mut().iter_mut().enumerate() {
                    let acc = &mut self.second[l];
                    let g = &grads.layers[l];
                    for (i, w) in layer.weights.iter_mut().enumerate() {
                        let gi = g.weights[i];
                        acc.weights[i] = decay * acc.weights[i] + (1.0 - decay) * gi * gi;
                        *w -= lr * gi / (acc.weights[i].sqrt() + NUMERIC_EPS);
                    }
                    for (i, b) in layer.biases.iter_mut().enumerate() {
                        let gi = g.biases[i];
                        acc.biases[i] = decay * acc.biases[i] + (1.0 - decay) * gi * gi;
                        *b -= lr * gi / (acc.biases[i].sqrt() + NUMERIC_EPS);
                    }
                }
            }
            OptimizerKind::Adam { beta1, beta2 } => {
                let first = self.first.as_mut().expect("adam state present");
                let t = self.step as i32;
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                for (l, layer) in net.layers_mut().iter_mut().enumerate() {
                    let m = &mut first[l];
                    let v = &mut self.second[l];
                    let g = &grads.layers[l];
                    for (i, w) in layer.weights.iter_mut().enumerate() {
                        let gi = g.weights[i];
                        m.weights[i] = beta1 * m.weights[i] + (1.0 - beta1) * gi;
                        v.weights[i] = beta2 * v.weights[i] + (1.0 - beta2) * gi * gi;
                        let m_hat = m.weights[i] / bc1;
                        let v_hat = v.weights[i] / bc2;
                        *w -= lr * m_hat / (v_hat.sqrt() + NUMERIC_EPS);
                    }
                    for (i, b) in layer.biases.iter_mut().enumerate() {
                        let gi = g.biases[i];
                        m.biases[i] = beta1 * m.biases[i] + (1.0 - beta1) * gi;
                        v.biases[i] = beta2 * v.biases[i] + (1.0 - beta2) * gi * gi;
                        let m_hat = m.biases[i] / bc1;
                        let v_hat = v.biases[i] / bc2;
                        *b -= lr * m_hat / (v_hat.sqrt() + NUMERIC_EPS);
                    }
                }
            }
        }
        if !net.params_finite() {
            return Err(Error::Numeric(
                "non-finite parameter after optimizer update".into(),
            ));
        }
        Ok(())
    }
}
