//! Rényi-DP of the subsampled Gaussian mechanism.
//!
//! For sampling rate `q = 1` the Gaussian mechanism has the closed form
//! `alpha / (2 sigma^2)`. For `q < 1` this evaluates the exact Rényi
//! divergence of the mixture pair `(N(0, sigma^2), (1-q) N(0, sigma^2) + q
//! N(1, sigma^2))` in log space: a binomial sum for integer orders and the
//! split-integral series for fractional orders.

use std::f64::consts::PI;

use statrs::function::erf::erfc;

/// RDP of one subsampled-Gaussian step at a single order.
///
/// Caller guarantees `sigma > 0`, `0 < q <= 1`, `alpha > 1`.
pub(crate) fn rdp_gaussian_single(q: f64, sigma: f64, alpha: f64) -> f64 {
    if q == 1.0 {
        return alpha / (2.0 * sigma * sigma);
    }
    let log_a = if alpha.fract() == 0.0 {
        log_a_int(q, sigma, alpha as u64)
    } else {
        log_a_frac(q, sigma, alpha)
    };
    log_a / (alpha - 1.0)
}

/// `ln sum_{i=0}^{alpha} C(alpha,i) q^i (1-q)^(alpha-i) e^{(i^2-i)/(2 sigma^2)}`
fn log_a_int(q: f64, sigma: f64, alpha: u64) -> f64 {
    let mut log_a = f64::NEG_INFINITY;
    let mut log_coef = 0.0; // ln C(alpha, i), updated incrementally
    for i in 0..=alpha {
        if i > 0 {
            log_coef += ((alpha - i + 1) as f64).ln() - (i as f64).ln();
        }
        let i_f = i as f64;
        let term = log_coef
            + i_f * q.ln()
            + (alpha - i) as f64 * (1.0 - q).ln()
            + (i_f * i_f - i_f) / (2.0 * sigma * sigma);
        log_a = log_add(log_a, term);
    }
    log_a
}

/// Fractional-order variant: the integral splits at `z0` and each side is
/// expanded as a generalized binomial series whose terms eventually decay
/// like `(1-q)^i`; the loop stops once both terms drop below `e^-30`.
fn log_a_frac(q: f64, sigma: f64, alpha: f64) -> f64 {
    let sigma_sq = sigma * sigma;
    let z0 = sigma_sq * (1.0 / q - 1.0).ln() + 0.5;
    let sqrt2_sigma = std::f64::consts::SQRT_2 * sigma;

    let (mut log_a0, mut log_a1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut log_abs_coef = 0.0; // ln |binom(alpha, i)|
    let mut coef_positive = true;
    let mut i: u64 = 0;
    loop {
        if i > 0 {
            let factor = (alpha - i as f64 + 1.0) / i as f64;
            log_abs_coef += factor.abs().ln();
            if factor < 0.0 {
                coef_positive = !coef_positive;
            }
        }
        let i_f = i as f64;
        let j = alpha - i_f;

        let log_t0 = log_abs_coef + i_f * q.ln() + j * (1.0 - q).ln();
        let log_t1 = log_abs_coef + j * q.ln() + i_f * (1.0 - q).ln();
        let log_e0 = 0.5_f64.ln() + log_erfc((i_f - z0) / sqrt2_sigma);
        let log_e1 = 0.5_f64.ln() + log_erfc((z0 - j) / sqrt2_sigma);
        let log_s0 = log_t0 + (i_f * i_f - i_f) / (2.0 * sigma_sq) + log_e0;
        let log_s1 = log_t1 + (j * j - j) / (2.0 * sigma_sq) + log_e1;

        if coef_positive {
            log_a0 = log_add(log_a0, log_s0);
            log_a1 = log_add(log_a1, log_s1);
        } else {
            log_a0 = log_sub(log_a0, log_s0);
            log_a1 = log_sub(log_a1, log_s1);
        }

        i += 1;
        if log_s0.max(log_s1) < -30.0 {
            break;
        }
    }
    log_add(log_a0, log_a1)
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`.
pub(crate) fn log_sub(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b, "log_sub needs a >= b, got {a} < {b}");
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == b {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp_m1()).ln()
}

/// `ln erfc(x)`, switching to the asymptotic tail expansion once `erfc`
/// underflows to zero (around `x ~ 27`).
fn log_erfc(x: f64) -> f64 {
    let r = erfc(x);
    if r > 0.0 {
        r.ln()
    } else {
        -PI.ln() / 2.0 - x.ln() - x * x - 0.5 * x.powi(-2) + 0.625 * x.powi(-4)
            - 37.0 / 24.0 * x.powi(-6)
            + 353.0 / 64.0 * x.powi(-8)
    }
}
