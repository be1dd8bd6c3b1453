//! Differential-privacy primitives: per-example gradient clipping, Gaussian
//! noising of gradient sums, the analytic Gaussian-mechanism bound, and a
//! Rényi-DP accountant with noise calibration.
//!
//! Budget bookkeeping follows the post-processing rule: only discriminator
//! updates consume privacy, so the accountant ticks exactly once per noisy
//! gradient release.

mod rdp;

use std::io::Write;

use rand::distributions::Distribution;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::{Error, Prng, Result};

/// Privacy parameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacySpec {
    /// Target privacy budget.
    pub epsilon: f64,
    /// Failure probability.
    pub delta: f64,
    /// L2 bound applied to each per-example gradient.
    pub clip_norm: f64,
    /// Ratio of the noise standard deviation to `clip_norm`.
    pub noise_multiplier: f64,
    /// Batch fraction `m / N`.
    pub sampling_rate: f64,
    /// Number of noisy releases the run is allowed.
    pub steps: u64,
}

impl PrivacySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must be in (0,1): {}", self.delta)));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon must be > 0: {}", self.epsilon)));
        }
        if self.clip_norm <= 0.0 {
            return Err(Error::Config(format!(
                "clip norm must be > 0: {}",
                self.clip_norm
            )));
        }
        if self.noise_multiplier <= 0.0 {
            return Err(Error::Config(format!(
                "noise multiplier must be > 0: {}",
                self.noise_multiplier
            )));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return Err(Error::Config(format!(
                "sampling rate must be in (0,1]: {}",
                self.sampling_rate
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("step count must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scales `g` by `min(1, clip_norm / ||g||)`. Vectors already inside the ball
/// (including the zero vector) are returned unchanged.
pub fn clip_gradient(g: &[f64], clip_norm: f64) -> Result<Vec<f64>> {
    if clip_norm <= 0.0 {
        return Err(Error::Config(format!("clip norm must be > 0: {clip_norm}")));
    }
    let norm = l2_norm(g);
    if norm > clip_norm {
        let scale = clip_norm / norm;
        Ok(g.iter().map(|x| x * scale).collect())
    } else {
        Ok(g.to_vec())
    }
}

fn sum_gradients(grads: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = grads
        .first()
        .ok_or_else(|| Error::Config("empty gradient list".into()))?;
    let dim = first.len();
    let mut sum = vec![0.0; dim];
    for g in grads {
        if g.len() != dim {
            return Err(Error::Schema(format!(
                "gradient length {} does not match {}",
                g.len(),
                dim
            )));
        }
        for (s, x) in sum.iter_mut().zip(g) {
            *s += x;
        }
    }
    Ok(sum)
}

/// Plain average of gradients, summed in input order. The non-private
/// training path uses this so that it is arithmetic-identical to
/// [`noisy_mean`] with zero noise.
pub fn mean_gradient(grads: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut sum = sum_gradients(grads)?;
    let m = grads.len() as f64;
    for x in &mut sum {
        *x /= m;
    }
    Ok(sum)
}

/// `(sum_i g_i + N(0, (sigma_n * clip_norm)^2 I)) / m`.
///
/// Every input must already satisfy `||g_i|| <= clip_norm`; feeding an
/// unclipped gradient is a contract violation because it would break the
/// sensitivity assumption behind the noise scale. With `sigma_n == 0` no RNG
/// draws are consumed and the result equals [`mean_gradient`] exactly.
pub fn noisy_mean(
    grads: &[Vec<f64>],
    sigma_n: f64,
    clip_norm: f64,
    rng: &mut Prng,
) -> Result<Vec<f64>> {
    if clip_norm <= 0.0 {
        return Err(Error::Config(format!("clip norm must be > 0: {clip_norm}")));
    }
    if sigma_n < 0.0 {
        return Err(Error::Config(format!("noise multiplier must be >= 0: {sigma_n}")));
    }
    for (i, g) in grads.iter().enumerate() {
        let norm = l2_norm(g);
        if norm > clip_norm + 1e-9 {
            return Err(Error::Contract(format!(
                "gradient {i} has norm {norm:.6} > clip norm {clip_norm}"
            )));
        }
    }
    let mut sum = sum_gradients(grads)?;
    if sigma_n > 0.0 {
        let normal = Normal::new(0.0, sigma_n * clip_norm)
            .map_err(|e| Error::Config(format!("bad noise parameters: {e}")))?;
        for x in &mut sum {
            *x += normal.sample(rng);
        }
    }
    let m = grads.len() as f64;
    for x in &mut sum {
        *x /= m;
    }
    Ok(sum)
}

/// Minimal Gaussian-mechanism noise (per unit L2 sensitivity) for
/// `(epsilon, delta)`-DP: `sqrt(2 ln(1.25/delta)) / epsilon`.
///
/// The analytic bound is only valid for `epsilon < 1`.
pub fn gaussian_sigma_bound(epsilon: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must be in (0,1): {delta}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!(
            "gaussian bound only valid for 0 < epsilon < 1, got {epsilon}"
        )));
    }
    Ok((2.0 * (1.25 / delta).ln()).sqrt() / epsilon)
}

/// Default order grid for the accountant.
pub fn default_orders() -> Vec<f64> {
    let mut orders = vec![1.25, 1.5, 1.75, 2.0, 2.5];
    orders.extend((3..=64).map(f64::from));
    orders.push(128.0);
    orders.push(256.0);
    orders
}

/// Per-order RDP of one subsampled-Gaussian step.
///
/// For `q == 1` this is exactly `alpha / (2 sigma_n^2)`; for `q < 1` the
/// subsampling amplification bound, which never exceeds the full-batch value.
pub fn rdp_gaussian(sigma_n: f64, q: f64, orders: &[f64]) -> Result<Vec<f64>> {
    if sigma_n <= 0.0 {
        return Err(Error::Config(format!("sigma must be > 0: {sigma_n}")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Config(format!("sampling rate must be in (0,1]: {q}")));
    }
    orders
        .iter()
        .map(|&alpha| {
            if alpha <= 1.0 {
                Err(Error::Config(format!("RDP orders must be > 1, got {alpha}")))
            } else {
                Ok(rdp::rdp_gaussian_single(q, sigma_n, alpha))
            }
        })
        .collect()
}

/// Accumulated RDP over a fixed order grid.
///
/// Steps are stored as `(per-step rdp, count)` groups rather than running
/// sums so that composing `a` steps and then `b` steps of the same mechanism
/// is *exactly* `(a + b)` composed steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountantState {
    orders: Vec<f64>,
    groups: Vec<(Vec<f64>, u64)>,
    steps_recorded: u64,
}

impl AccountantState {
    pub fn new(orders: Vec<f64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::Config("order grid is empty".into()));
        }
        for w in orders.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("orders must be strictly ascending".into()));
            }
        }
        if orders[0] <= 1.0 {
            return Err(Error::Config("orders must all be > 1".into()));
        }
        Ok(Self {
            orders,
            groups: Vec::new(),
            steps_recorded: 0,
        })
    }

    pub fn with_default_orders() -> Self {
        Self::new(default_orders()).expect("default grid is valid")
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn steps_recorded(&self) -> u64 {
        self.steps_recorded
    }

    /// Adds `n_steps` compositions of a mechanism with the given per-order RDP.
    pub fn compose(&mut self, step_rdp: &[f64], n_steps: u64) -> Result<()> {
        if step_rdp.len() != self.orders.len() {
            return Err(Error::Schema(format!(
                "per-order values length {} does not match {} orders",
                step_rdp.len(),
                self.orders.len()
            )));
        }
        if n_steps == 0 {
            return Ok(());
        }
        if let Some(group) = self.groups.iter_mut().find(|(r, _)| r == step_rdp) {
            group.1 += n_steps;
        } else {
            self.groups.push((step_rdp.to_vec(), n_steps));
        }
        self.steps_recorded += n_steps;
        Ok(())
    }

    pub fn rdp_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.orders.len()];
        for (rdp, count) in &self.groups {
            for (t, r) in totals.iter_mut().zip(rdp) {
                *t += *count as f64 * r;
            }
        }
        totals
    }

    /// Converts the accumulated RDP to `(epsilon, best_order)` at `delta`:
    /// the minimum over orders of `rdp(alpha) + ln(1/delta) / (alpha - 1)`.
    pub fn epsilon(&self, delta: f64) -> Result<(f64, f64)> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("delta must be in (0,1): {delta}")));
        }
        let log_inv_delta = (1.0 / delta).ln();
        let totals = self.rdp_totals();
        let mut best = (f64::INFINITY, self.orders[0]);
        for (&alpha, &rdp) in self.orders.iter().zip(&totals) {
            let eps = rdp + log_inv_delta / (alpha - 1.0);
            if eps < best.0 {
                best = (eps, alpha);
            }
        }
        Ok(best)
    }
}

/// Epsilon after `steps` subsampled-Gaussian releases, used by calibration.
pub fn epsilon_after(sigma_n: f64, q: f64, steps: u64, delta: f64) -> Result<f64> {
    let mut state = AccountantState::with_default_orders();
    let step_rdp = rdp_gaussian(sigma_n, q, state.orders().to_vec().as_slice())?;
    state.compose(&step_rdp, steps)?;
    Ok(state.epsilon(delta)?.0)
}

/// Finds the smallest noise multiplier (on a binary-search grid) whose
/// accounted epsilon after `steps` releases at rate `q` stays within
/// `target_epsilon`.
pub fn calibrate_noise(target_epsilon: f64, delta: f64, q: f64, steps: u64) -> Result<f64> {
    if target_epsilon <= 0.0 {
        return Err(Error::Config(format!(
            "target epsilon must be > 0: {target_epsilon}"
        )));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Config(format!("sampling rate must be in (0,1]: {q}")));
    }
    if steps == 0 {
        return Err(Error::Config("step count must be >= 1".into()));
    }

    let mut lo = 1e-4;
    if epsilon_after(lo, q, steps, delta)? <= target_epsilon {
        return Ok(lo);
    }
    let mut hi = 1.0;
    while epsilon_after(hi, q, steps, delta)? > target_epsilon {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Calibration(format!(
                "no sigma in (0, 1e6] reaches epsilon {target_epsilon} \
                 (delta {delta}, q {q}, steps {steps}); epsilon at 1e6: {:.4}",
                epsilon_after(1e6, q, steps, delta)?
            )));
        }
    }
    for _ in 0..200 {
        if (hi - lo) / hi < 1e-9 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if epsilon_after(mid, q, steps, delta)? <= target_epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One per-step row of the accountant trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountantTraceRow {
    pub step: u64,
    pub best_order: f64,
    pub epsilon: f64,
}

/// Writes the trace in the documented CSV layout
/// (`step,best_order,epsilon_at_delta`).
pub fn write_accountant_trace<W: Write>(mut w: W, rows: &[AccountantTraceRow]) -> Result<()> {
    writeln!(w, "step,best_order,epsilon_at_delta")?;
    for row in rows {
        writeln!(w, "{},{},{:.6}", row.step, row.best_order, row.epsilon)?;
    }
    Ok(())
}
