//! Log-domain helpers shared by the channel law and the bounds.

use std::f64::consts::PI;

/// `ln(n!)` via the log-gamma function.
#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Table of `ln(k!)` for `k = 0..=n`.
pub fn ln_factorial_table(n: usize) -> Vec<f64> {
    (0..=n as u64).map(ln_factorial).collect()
}

/// `ln(sum(exp(terms)))` without overflow. Empty input gives `-inf`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Shannon entropy in nats of a (possibly truncated) probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// Entropy of the geometric (Bose-Einstein) law with the given mean.
pub fn geometric_entropy(mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    (1.0 + mean) * (1.0 + mean).ln() - mean * mean.ln()
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `s / erf(s)`, continuous at `s = 0` where it equals `sqrt(pi)/2`.
pub fn s_over_erf(s: f64) -> f64 {
    if s < 1e-4 {
        // erf(s) = 2s/sqrt(pi) (1 - s^2/3 + s^4/10 - ...)
        let s2 = s * s;
        PI.sqrt() / 2.0 / (1.0 - s2 / 3.0 + s2 * s2 / 10.0)
    } else {
        s / libm::erf(s)
    }
}

/// Mean of the density proportional to `x^{-1/2} e^{-mu x}` on `[0, 1]`.
///
/// Decreases from `1/3` at `mu = 0` to `0` as `mu -> inf`, behaving like
/// `1/(2 mu)` for large `mu`.
pub fn truncated_gamma_half_mean(mu: f64) -> f64 {
    if mu <= 0.0 {
        return 1.0 / 3.0;
    }
    if mu < 2.0 {
        // Ratio of the power series of int_0^1 u^{s} e^{-mu u} du for
        // s = 1/2 and s = -1/2.
        let mut num = 0.0;
        let mut den = 0.0;
        let mut coeff = 1.0; // (-mu)^k / k!
        for k in 0..60 {
            let kf = k as f64;
            num += coeff / (kf + 1.5);
            den += coeff / (kf + 0.5);
            coeff *= -mu / (kf + 1.0);
            if coeff.abs() < 1e-18 {
                break;
            }
        }
        num / den
    } else {
        let s = mu.sqrt();
        0.5 / mu - (-mu).exp() / (s * PI.sqrt() * libm::erf(s))
    }
}
