//! The Laguerre photon-count law W(y|x).
//!
//! A coherent field of intensity `x` superposed on narrow-band thermal noise
//! of mean `lambda` and photodetected gives a count `Y` with
//!
//! ```text
//! W(y|x) = e^{-x/(1+l)} / (1+l) * (l/(1+l))^y * sum_{j=0}^{y} t^j y! / ((j!)^2 (y-j)!)
//! ```
//!
//! with `t = x / (l (1 + l))`. The finite sum is evaluated in the log
//! domain; `lambda = 0` (Poisson) and `x = 0` (geometric) are separate
//! branches because `t` is undefined or zero there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cdma::CdmaConfig;
use crate::error::{ensure_nonneg, Error, Result};
use crate::special::{entropy, ln_factorial, ln_factorial_table, log_sum_exp};

/// Independent-noise channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Mean noise photon count per symbol.
    pub lambda: f64,
}

impl ChannelParams {
    pub fn new(lambda: f64) -> Result<Self> {
        ensure_nonneg("lambda", lambda)?;
        Ok(Self { lambda })
    }

    fn validate(&self) -> Result<()> {
        ensure_nonneg("lambda", self.lambda)
    }
}

/// One row `W(.|x)` of the channel, truncated at `y_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfRow {
    pub x: f64,
    pub lambda: f64,
    /// `probs[y] = W(y|x)` for `y = 0..=y_max`.
    pub probs: Vec<f64>,
    /// Probability mass beyond `y_max`.
    pub tail_mass: f64,
}

impl PmfRow {
    pub fn y_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(y, p)| y as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(y, p)| (y as f64 - mean).powi(2) * p)
            .sum()
    }

    /// Shannon entropy (nats) of the truncated row.
    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

/// Probability generating functions appearing in the degradation argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pgf {
    /// Poisson law of the given mean: `exp(x (z - 1))`.
    Poisson { mean: f64 },
    /// Per-photon birth-death kernel: `(z + l(1-z)) / (1 + l(1-z))`.
    BirthDeath { lambda: f64 },
    /// Bose-Einstein (geometric) law of mean `lambda`: `1 / (1 + l(1-z))`.
    BoseEinstein { lambda: f64 },
    /// The Laguerre law itself, summed as a series over its pmf.
    Laguerre { x: f64, lambda: f64 },
}

impl Pgf {
    /// `sum_y p(y) z^y` for `z` in `[0, 1]`.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::Domain(format!("pgf argument z = {z} outside [0, 1]")));
        }
        match *self {
            Pgf::Poisson { mean } => {
                ensure_nonneg("mean", mean)?;
                Ok((mean * (z - 1.0)).exp())
            }
            Pgf::BirthDeath { lambda } => {
                ensure_nonneg("lambda", lambda)?;
                let d = lambda * (1.0 - z);
                Ok((z + d) / (1.0 + d))
            }
            Pgf::BoseEinstein { lambda } => {
                ensure_nonneg("lambda", lambda)?;
                Ok(1.0 / (1.0 + lambda * (1.0 - z)))
            }
            Pgf::Laguerre { x, lambda } => {
                let row = pmf_row(x, ChannelParams::new(lambda)?, 1e-14)?;
                // Horner from the top keeps the sum in one pass.
                Ok(row.probs.iter().rev().fold(0.0, |acc, &p| acc * z + p))
            }
        }
    }
}

/// Mean and variance of `W(.|x)`.
pub fn moments(x: f64, params: ChannelParams) -> Result<(f64, f64)> {
    ensure_nonneg("x", x)?;
    params.validate()?;
    let l = params.lambda;
    Ok((x + l, x * (1.0 + 2.0 * l) + l * (1.0 + l)))
}

/// `ln W(y|x)` in nats.
pub fn log_pmf(y: u64, x: f64, params: ChannelParams) -> Result<f64> {
    ensure_nonneg("x", x)?;
    params.validate()?;
    Ok(log_pmf_unchecked(y as usize, x, params.lambda, &|k| {
        ln_factorial(k as u64)
    }))
}

fn log_pmf_unchecked(y: usize, x: f64, lambda: f64, ln_fact: &dyn Fn(usize) -> f64) -> f64 {
    let yf = y as f64;
    if lambda == 0.0 {
        return if x == 0.0 {
            if y == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -x + yf * x.ln() - ln_fact(y)
        };
    }
    let base = -(1.0 + lambda).ln() + yf * (lambda / (1.0 + lambda)).ln();
    if x == 0.0 {
        return base;
    }
    let ln_t = x.ln() - lambda.ln() - (1.0 + lambda).ln();
    let ln_y_fact = ln_fact(y);
    let terms: Vec<f64> = (0..=y)
        .map(|j| j as f64 * ln_t + ln_y_fact - 2.0 * ln_fact(j) - ln_fact(y - j))
        .collect();
    base - x / (1.0 + lambda) + log_sum_exp(&terms)
}

/// Row `W(.|x)` covering `y = 0..=y_max` for a caller-chosen `y_max`.
pub fn pmf_row_fixed(x: f64, params: ChannelParams, y_max: usize) -> Result<PmfRow> {
    ensure_nonneg("x", x)?;
    params.validate()?;
    let table = ln_factorial_table(y_max);
    let ln_fact = |k: usize| table[k];
    let probs: Vec<f64> = (0..=y_max)
        .map(|y| log_pmf_unchecked(y, x, params.lambda, &ln_fact).exp())
        .collect();
    let tail_mass = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(PmfRow {
        x,
        lambda: params.lambda,
        probs,
        tail_mass,
    })
}

/// Row `W(.|x)` extended until the mass beyond `y_max` is at most `tail_tol`.
///
/// The initial window is `mean + 10 std`, doubled until the tail criterion
/// holds.
pub fn pmf_row(x: f64, params: ChannelParams, tail_tol: f64) -> Result<PmfRow> {
    if !(tail_tol > 0.0 && tail_tol <= 1e-3) {
        return Err(Error::Parameter(format!("tail tolerance {tail_tol} outside (0, 1e-3]")));
    }
    let (mean, var) = moments(x, params)?;
    let mut y_max = (mean + 10.0 * var.sqrt()).ceil() as usize;
    let mut row = pmf_row_fixed(x, params, y_max)?;
    loop {
        if row.tail_mass <= tail_tol {
            return Ok(row);
        }
        // `1 - sum` cannot resolve tails below the rounding error of the
        // sum itself. When doubling the window adds almost no mass, the true
        // tail is far below anything `1 - sum` can show, so report the mass
        // the extension actually found instead.
        let wider = pmf_row_fixed(x, params, (2 * y_max).max(8))?;
        let added: f64 = wider.probs[y_max + 1..].iter().sum();
        if added <= 1e-3 * tail_tol {
            let probs = wider.probs[..=y_max].to_vec();
            return Ok(PmfRow {
                tail_mass: added,
                probs,
                ..row
            });
        }
        y_max = wider.y_max();
        row = wider;
    }
}

/// Row of the CDMA per-user law: the Laguerre law with signal gain `1/M` and
/// noise mean `beta * eta`.
pub fn cdma_pmf_row(x: f64, cfg: &CdmaConfig, tail_tol: f64) -> Result<PmfRow> {
    cfg.validate()?;
    let eff = cfg.effective_params();
    pmf_row(x * eff.gain, ChannelParams::new(eff.noise_mean)?, tail_tol)
}

/// Draw `n` photon counts for input `x`.
///
/// Each count is Poisson with intensity `|sqrt(x) + G|^2`, `G` a circular
/// complex Gaussian with `E|G|^2 = lambda`. The stream depends only on
/// `(x, lambda, n, seed)`.
pub fn sample(x: f64, params: ChannelParams, n: usize, seed: u64) -> Result<Vec<u64>> {
    ensure_nonneg("x", x)?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw(x, params.lambda, &mut rng)).collect())
}

/// Seed for worker `stream` of a parallel sampling job rooted at `seed`.
///
/// Workers must use `sample(.., stream_seed(seed, k))` for their `k`-th
/// chunk so that results do not depend on scheduling.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser over the pair
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Single draw of `Y` given `x`.
pub fn draw<R: Rng + ?Sized>(x: f64, lambda: f64, rng: &mut R) -> u64 {
    let sigma = (lambda / 2.0).sqrt();
    let re: f64 = x.sqrt() + sigma * rng.sample::<f64, _>(StandardNormal);
    let im: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
    let intensity = re * re + im * im;
    if intensity <= 0.0 {
        return 0;
    }
    Poisson::new(intensity).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn p(l: f64) -> ChannelParams {
        ChannelParams::new(l).unwrap()
    }

    #[test]
    fn geometric_at_zero_input() {
        assert!((log_pmf(0, 0.0, p(1.0)).unwrap() + LN_2).abs() < 1e-15);
        let row = pmf_row(0.0, p(1.0), 1e-9).unwrap();
        for (y, &q) in row.probs.iter().enumerate() {
            assert!((q - 0.5f64.powi(y as i32 + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_count_closed_form() {
        // W(0|x) = e^{-x/(1+l)} / (1+l)
        let v = log_pmf(0, 2.0, p(1.0)).unwrap();
        assert!((v - (-1.0 - LN_2)).abs() < 1e-14);
    }

    #[test]
    fn poisson_branch() {
        let v = log_pmf(3, 4.0, p(0.0)).unwrap();
        let expect = -4.0 + 3.0 * 4f64.ln() - 6f64.ln();
        assert!((v - expect).abs() < 1e-14);
        assert_eq!(log_pmf(0, 0.0, p(0.0)).unwrap(), 0.0);
        assert_eq!(log_pmf(2, 0.0, p(0.0)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn moments_examples() {
        assert_eq!(moments(0.0, p(0.0)).unwrap(), (0.0, 0.0));
        assert_eq!(moments(3.0, p(2.0)).unwrap(), (5.0, 21.0));
        assert_eq!(moments(7.0, p(0.0)).unwrap(), (7.0, 7.0));
    }

    #[test]
    fn negative_arguments_rejected() {
        assert!(matches!(log_pmf(0, -1.0, p(1.0)), Err(Error::Domain(_))));
        assert!(ChannelParams::new(-0.5).is_err());
        assert!(moments(-1.0, p(0.0)).is_err());
        let bad = ChannelParams { lambda: -1.0 };
        assert!(log_pmf(1, 1.0, bad).is_err());
    }

    #[test]
    fn tail_tolerance_range() {
        assert!(matches!(pmf_row(1.0, p(1.0), 0.0), Err(Error::Parameter(_))));
        assert!(matches!(pmf_row(1.0, p(1.0), 1e-2), Err(Error::Parameter(_))));
        assert!(pmf_row(1.0, p(1.0), 1e-3).is_ok());
    }

    #[test]
    fn row_mean_and_variance() {
        let row = pmf_row(5.0, p(1.0), 1e-9).unwrap();
        assert!(row.total() >= 1.0 - 1e-9);
        assert!((row.mean() - 6.0).abs() < 1e-6);
        let row = pmf_row(5.0, p(2.0), 1e-9).unwrap();
        assert!((row.variance() - 31.0).abs() < 1e-6);
        assert!((row.total() + row.tail_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_row() {
        let row = pmf_row(0.0, p(0.0), 1e-9).unwrap();
        assert_eq!(row.probs, vec![1.0]);
        assert_eq!(row.tail_mass, 0.0);
    }

    #[test]
    fn pgf_examples() {
        assert_eq!(Pgf::BirthDeath { lambda: 3.0 }.eval(1.0).unwrap(), 1.0);
        assert_eq!(Pgf::BoseEinstein { lambda: 1.0 }.eval(0.0).unwrap(), 0.5);
        let lag = Pgf::Laguerre { x: 2.0, lambda: 1.0 }.eval(0.0).unwrap();
        assert!((lag - (-1f64).exp() / 2.0).abs() < 1e-15);
        assert!((lag - log_pmf(0, 2.0, p(1.0)).unwrap().exp()).abs() < 1e-15);
        assert!(Pgf::Poisson { mean: 1.0 }.eval(1.5).is_err());
        assert!(Pgf::Poisson { mean: 1.0 }.eval(-0.1).is_err());
    }

    #[test]
    fn sampler_degenerate_and_reproducible() {
        assert!(sample(0.0, p(0.0), 100, 1).unwrap().iter().all(|&y| y == 0));
        let a = sample(4.0, p(1.0), 1000, 9).unwrap();
        let b = sample(4.0, p(1.0), 1000, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(4.0, p(1.0), 1000, 10).unwrap());
    }

    #[test]
    fn stream_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| stream_seed(42, k)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
