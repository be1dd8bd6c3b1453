//! Batch losses for the downstream MLP models and the gradient checker.

use crate::matrix::Matrix;

/// A scalar loss over a batch of network outputs, with its gradient.
pub trait BatchLoss {
    fn value(&self, outputs: &Matrix) -> f64;
    /// Gradient of [`value`](Self::value) with respect to each output entry.
    fn grad(&self, outputs: &Matrix) -> Matrix;
}

/// Mean squared error: `(1/m) * sum_i sum_d (o_id - t_id)^2`.
pub struct MseLoss {
    pub targets: Matrix,
}

impl BatchLoss for MseLoss {
    fn value(&self, outputs: &Matrix) -> f64 {
        let m = outputs.rows() as f64;
        let mut total = 0.0;
        for r in 0..outputs.rows() {
            for (o, t) in outputs.row(r).iter().zip(self.targets.row(r)) {
                let d = o - t;
                total += d * d;
            }
        }
        total / m
    }

    fn grad(&self, outputs: &Matrix) -> Matrix {
        let m = outputs.rows() as f64;
        let mut g = Matrix::zeros(outputs.rows(), outputs.cols());
        for r in 0..outputs.rows() {
            for c in 0..outputs.cols() {
                g.set(r, c, 2.0 * (outputs.get(r, c) - self.targets.get(r, c)) / m);
            }
        }
        g
    }
}

/// Softmax cross-entropy over logits: `(1/m) * sum_i -ln softmax(o_i)[y_i]`.
pub struct SoftmaxCrossEntropy {
    pub labels: Vec<usize>,
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|v| v - log_sum).collect()
}

impl BatchLoss for SoftmaxCrossEntropy {
    fn value(&self, outputs: &Matrix) -> f64 {
        let m = outputs.rows() as f64;
        let mut total = 0.0;
        for r in 0..outputs.rows() {
            total -= log_softmax(outputs.row(r))[self.labels[r]];
        }
        total / m
    }

    fn grad(&self, outputs: &Matrix) -> Matrix {
        let m = outputs.rows() as f64;
        let mut g = Matrix::zeros(outputs.rows(), outputs.cols());
        for r in 0..outputs.rows() {
            let ls = log_softmax(outputs.row(r));
            for c in 0..outputs.cols() {
                let p = ls[c].exp();
                let target = if c == self.labels[r] { 1.0 } else { 0.0 };
                g.set(r, c, (p - target) / m);
            }
        }
        g
    }
}
