//! Coherent optical CDMA as a Laguerre channel with input-dependent noise.
//!
//! With `M` users and `N0` mask chips, a pulse of intensity `I` leaves the
//! matching decoder with intensity `I/M` and every other decoder with
//! `I/(M N0)`. Summing the `M - 1` interferers and applying the law of large
//! numbers turns the per-user channel into the Laguerre law with signal gain
//! `1/M` and noise mean `beta * eta`, `beta = (M - 1) / (M N0)`.

use std::f64::consts::{E as EULER, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    shaped_entropy, slack_terms, solve_mu, Active, BoundResult, MuRule, PowerConstraints, Regime, ALPHA_THRESHOLD,
};
use crate::error::{ensure_nonneg, Error, Result};
use crate::optimize::bisect;
use crate::special::truncated_gamma_half_mean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdmaConfig {
    /// Number of users `M`.
    pub users: u32,
    /// Code length `N0`.
    pub chips: u32,
    /// Mean input intensity per user.
    pub eta: f64,
}

/// Per-user channel after the large-`M` reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChannel {
    pub gain: f64,
    pub noise_mean: f64,
}

impl CdmaConfig {
    pub fn new(users: u32, chips: u32, eta: f64) -> Result<Self> {
        let cfg = Self { users, chips, eta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users < 2 {
            return Err(Error::Parameter(format!("need at least 2 users, got {}", self.users)));
        }
        if self.chips < 1 {
            return Err(Error::Parameter("code length must be >= 1".into()));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Parameter(format!("eta must be > 0, got {}", self.eta)));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        beta(self.users, self.chips)
    }

    pub fn effective_params(&self) -> EffectiveChannel {
        EffectiveChannel {
            gain: 1.0 / self.users as f64,
            noise_mean: self.beta() * self.eta,
        }
    }
}

/// `(M - 1) / (M N0)`.
pub fn beta(users: u32, chips: u32) -> f64 {
    (users as f64 - 1.0) / (users as f64 * chips as f64)
}

/// Intensity seen at a decoder output for an input pulse of intensity `i`.
pub fn decoder_intensity(i: f64, users: u32, chips: u32, same_user: bool) -> Result<f64> {
    ensure_nonneg("intensity", i)?;
    if users < 2 || chips < 1 {
        return Err(Error::Parameter(format!("invalid network: M = {users}, N0 = {chips}")));
    }
    let m = users as f64;
    Ok(if same_user { i / m } else { i / (m * chips as f64) })
}

pub fn effective_params(cfg: &CdmaConfig) -> Result<EffectiveChannel> {
    cfg.validate()?;
    Ok(cfg.effective_params())
}

/// Monte-Carlo estimate of the interference reaching one decoder when the
/// other `M - 1` users send i.i.d. exponential intensities of mean `eta`.
/// Returns `(mean, standard error)` over `trials` independent frames.
pub fn simulate_interference(cfg: &CdmaConfig, trials: usize, seed: u64) -> Result<(f64, f64)> {
    cfg.validate()?;
    if trials < 2 {
        return Err(Error::Parameter("need at least two trials".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sums: Vec<f64> = (0..trials)
        .map(|_| {
            (1..cfg.users)
                .map(|_| {
                    let u: f64 = rng.random();
                    let i = -cfg.eta * (1.0 - u).ln();
                    i / (cfg.users as f64 * cfg.chips as f64)
                })
                .sum()
        })
        .collect();
    let n = trials as f64;
    let mean = sums.iter().sum::<f64>() / n;
    let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// How the noise level inside the CDMA bound follows the input power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTracking {
    /// Every `E` in the bound is the authorised average power, whatever
    /// `alpha` the maximisation settles on.
    #[default]
    Cap,
    /// Every `E` is replaced by the average `alpha * A` actually used.
    Realized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdmaBound {
    pub bound: BoundResult,
    /// Optimised peak-to-average ratio; absent under an average-only constraint.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumCapacityPoint {
    pub users: u32,
    /// `users * per_user` (nats per channel use, all users together).
    pub value: f64,
    pub per_user: f64,
}

/// Network-level inputs of the bound, validated.
#[derive(Debug, Clone, Copy)]
struct Network {
    m: f64,
    beta: f64,
}

impl Network {
    fn new(users: u32, chips: u32) -> Result<Self> {
        if users < 2 || chips < 1 {
            return Err(Error::Parameter(format!("invalid network: M = {users}, N0 = {chips}")));
        }
        Ok(Self {
            m: users as f64,
            beta: beta(users, chips),
        })
    }

    /// Terms shared by the peak and average forms that depend only on the
    /// power symbol `e`: `log(1/M + (1+bE)/E) - 1/2 log((2bE+1)/M) +
    /// (E/M + bE) log(1 + 1/(E/M + bE)) - 1`.
    fn output_terms(&self, e: f64) -> f64 {
        let be = self.beta * e;
        let s = e / self.m + be;
        (1.0 / self.m + (1.0 + be) / e).ln() - 0.5 * ((2.0 * be + 1.0) / self.m).ln() + s * (1.0 / s).ln_1p() - 1.0
    }

    /// `M (12 bE (bE + 1) + 1) / (12 A (2 bE + 1))`.
    fn penalty_ratio(&self, peak: f64, e: f64) -> f64 {
        let be = self.beta * e;
        self.m * (12.0 * be * (be + 1.0) + 1.0) / (12.0 * peak * (2.0 * be + 1.0))
    }

    /// Peak-constrained bound at a given shape parameter (mean-matched alpha).
    fn peak_form(&self, peak: f64, e: f64, alpha: f64, mu: f64) -> f64 {
        let (_, scaled) = slack_terms(mu);
        let r = self.penalty_ratio(peak, e);
        let s = r.sqrt();
        let penalty = 2.0 * s * (1.0 / s).atan() + r.ln_1p();
        shaped_entropy(peak, alpha, mu) - scaled * penalty + self.output_terms(e) - 0.5 * (2.0 * PI * EULER).ln()
    }

    fn average_form(&self, e: f64) -> f64 {
        let be = self.beta * e;
        let c = self.m * PI * (12.0 * be * (be + 1.0) + 1.0);
        0.5 * e.ln() - (c / (24.0 * e * (2.0 * be + 1.0))).sqrt() + self.output_terms(e)
    }
}

/// Peak value, authorised average and the alpha cap `min(E/A, 1/3)`.
fn peak_setting(constraints: &PowerConstraints) -> Result<Option<(f64, f64, f64)>> {
    Ok(match constraints.active()? {
        Active::Both { peak, average } => Some((peak, average, (average / peak).min(ALPHA_THRESHOLD))),
        // With no average cap the peak-only input has mean A/3.
        Active::Peak(peak) => Some((peak, peak / 3.0, ALPHA_THRESHOLD)),
        Active::Average(_) => None,
    })
}

/// Peak-form objective as a function of the shape parameter `mu`.
fn objective(net: &Network, peak: f64, cap_average: f64, noise: NoiseTracking, mu: f64) -> f64 {
    let alpha = truncated_gamma_half_mean(mu);
    let e = match noise {
        NoiseTracking::Cap => cap_average,
        NoiseTracking::Realized => alpha * peak,
    };
    net.peak_form(peak, e, alpha, mu)
}

fn mu_for_cap(cap: f64) -> Result<f64> {
    if cap >= ALPHA_THRESHOLD {
        Ok(0.0)
    } else {
        solve_mu(cap, MuRule::MeanMatched)
    }
}

/// Maximising `(alpha, mu)` of the peak-form bound.
fn optimise(net: &Network, peak: f64, average: f64, cap: f64, noise: NoiseTracking) -> Result<(f64, f64)> {
    let mu_cap = mu_for_cap(cap)?;
    let g = |mu: f64| objective(net, peak, average, noise, mu);
    // Central difference in log(mu), sign-equivalent to d/dmu.
    let slope = |mu: f64| {
        let h = 1e-5;
        g(mu * (1.0 + h)) - g(mu * (1.0 - h))
    };

    let lo = mu_cap.max(1e-4);
    let hi = (mu_cap * 1e3).max(1e4);
    let points = 240;
    let grid: Vec<f64> = (0..points)
        .map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64))
        .collect();

    let mut best_mu = mu_cap;
    let mut best = g(mu_cap);
    let mut prev = slope(grid[0]);
    for w in grid.windows(2) {
        let next = slope(w[1]);
        if prev > 0.0 && next <= 0.0 {
            let root = bisect(slope, w[0], w[1], 1e-8 * w[0])?;
            let v = g(root);
            if v > best {
                best = v;
                best_mu = root;
            }
        }
        prev = next;
    }
    let alpha = if best_mu == mu_cap {
        cap
    } else {
        truncated_gamma_half_mean(best_mu).min(cap)
    };
    Ok((alpha, best_mu))
}

/// Optimal peak-to-average ratio for the CDMA peak-form bound.
///
/// Locates stationary points of the bound in the shape parameter `mu` by
/// sign-change bracketing on a log-spaced grid and bisection; when none
/// beats the boundary, returns the cap `min(E/A, 1/3)`.
pub fn alpha_star(constraints: &PowerConstraints, users: u32, chips: u32, noise: NoiseTracking) -> Result<f64> {
    let net = Network::new(users, chips)?;
    let (peak, average, cap) =
        peak_setting(constraints)?.ok_or_else(|| Error::Parameter("alpha* needs a peak constraint".into()))?;
    Ok(optimise(&net, peak, average, cap, noise)?.0)
}

/// Per-user capacity lower bound for the CDMA channel.
pub fn cdma_lower_bound(
    constraints: &PowerConstraints,
    users: u32,
    chips: u32,
    noise: NoiseTracking,
) -> Result<CdmaBound> {
    let net = Network::new(users, chips)?;
    match peak_setting(constraints)? {
        None => {
            let e = constraints.average.expect("average-only constraints");
            Ok(CdmaBound {
                bound: BoundResult {
                    value: net.average_form(e),
                    regime: Regime::AvgOnly,
                    mu: None,
                    asymptotic: false,
                },
                alpha: None,
            })
        }
        Some((peak, average, cap)) => {
            let (alpha, mu) = optimise(&net, peak, average, cap, noise)?;
            let regime = if alpha < ALPHA_THRESHOLD {
                Regime::PeakAvgSmallAlpha
            } else {
                Regime::PeakOnlyOrLargeAlpha
            };
            Ok(CdmaBound {
                bound: BoundResult {
                    value: objective(&net, peak, average, noise, mu),
                    regime,
                    mu: Some(mu),
                    asymptotic: false,
                },
                alpha: Some(alpha),
            })
        }
    }
}

/// Peak-form bound at a fixed `alpha` in `(0, min(E/A, 1/3)]`, no maximisation.
pub fn cdma_lower_bound_at(
    constraints: &PowerConstraints,
    users: u32,
    chips: u32,
    noise: NoiseTracking,
    alpha: f64,
) -> Result<f64> {
    let net = Network::new(users, chips)?;
    let (peak, average, cap) = peak_setting(constraints)?
        .ok_or_else(|| Error::Parameter("fixed-alpha bound needs a peak constraint".into()))?;
    if !(alpha > 0.0 && alpha <= cap) {
        return Err(Error::Regime {
            alpha,
            range: "(0, min(E/A, 1/3)]",
        });
    }
    Ok(objective(&net, peak, average, noise, mu_for_cap(alpha)?))
}

/// Sum-rate lower bound `M * C(A, E)` with every user under the same
/// constraints.
pub fn sum_capacity(
    constraints: &PowerConstraints,
    users: u32,
    chips: u32,
    noise: NoiseTracking,
) -> Result<SumCapacityPoint> {
    let per_user = cdma_lower_bound(constraints, users, chips, noise)?.bound.value;
    Ok(SumCapacityPoint {
        users,
        value: users as f64 * per_user,
        per_user,
    })
}

/// User count in `2..=max_users` maximising the sum-rate bound; ties go to
/// the smaller count.
pub fn optimal_users(constraints: &PowerConstraints, chips: u32, max_users: u32, noise: NoiseTracking) -> Result<u32> {
    if max_users < 2 {
        return Err(Error::Parameter(format!("max_users must be >= 2, got {max_users}")));
    }
    let mut best = (2, f64::NEG_INFINITY);
    for m in 2..=max_users {
        let v = sum_capacity(constraints, m, chips, noise)?.value;
        if v > best.1 {
            best = (m, v);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoder_intensity_examples() {
        assert_eq!(decoder_intensity(10.0, 10, 31, true).unwrap(), 1.0);
        assert!((decoder_intensity(10.0, 10, 31, false).unwrap() - 0.032_258_064_5).abs() < 1e-10);
        assert_eq!(decoder_intensity(0.0, 7, 3, false).unwrap(), 0.0);
        assert!(decoder_intensity(1.0, 1, 31, true).is_err());
        assert!(decoder_intensity(1.0, 4, 0, true).is_err());
    }

    #[test]
    fn effective_params_examples() {
        let e = effective_params(&CdmaConfig::new(100, 31, 5.0).unwrap()).unwrap();
        assert!((e.gain - 0.01).abs() < 1e-15);
        assert!((e.noise_mean - 99.0 / 3100.0 * 5.0).abs() < 1e-15);
        assert!((e.noise_mean - 0.159_68).abs() < 1e-5);
        let e = effective_params(&CdmaConfig::new(2, 1, 1.0).unwrap()).unwrap();
        assert_eq!((e.gain, e.noise_mean), (0.5, 0.5));
    }

    #[test]
    fn config_validation() {
        assert!(CdmaConfig::new(1, 31, 1.0).is_err());
        assert!(CdmaConfig::new(2, 0, 1.0).is_err());
        assert!(CdmaConfig::new(2, 1, 0.0).is_err());
        let cfg = CdmaConfig::new(10, 31, 5.0).unwrap();
        assert!(cfg.beta() > 0.0 && cfg.beta() < 1.0 / 31.0);
    }

    #[test]
    fn sum_is_m_times_per_user() {
        let c = PowerConstraints::both(200.0, 20.0).unwrap();
        let p = sum_capacity(&c, 7, 31, NoiseTracking::Cap).unwrap();
        assert_eq!(p.value, 7.0 * p.per_user);
        assert!(sum_capacity(&c, 1, 31, NoiseTracking::Cap).is_err());
    }

    #[test]
    fn optimal_users_single_candidate() {
        let c = PowerConstraints::both(200.0, 20.0).unwrap();
        assert_eq!(optimal_users(&c, 31, 2, NoiseTracking::Cap).unwrap(), 2);
        assert!(optimal_users(&c, 31, 1, NoiseTracking::Cap).is_err());
    }

    #[test]
    fn reduces_to_independent_noise_bound_at_unit_gain_limit() {
        // The peak form is the independent-noise bound for the effective
        // channel: peak A/M, average E/M, noise beta E.
        let (a, e, m, n0) = (400.0, 40.0, 4u32, 7u32);
        let net = Network::new(m, n0).unwrap();
        let alpha = e / a;
        let mu = solve_mu(alpha, MuRule::MeanMatched).unwrap();
        let direct = net.peak_form(a, e, alpha, mu);
        let lam = beta(m, n0) * e;
        let eq = crate::bounds::peak_average_lower(a / m as f64, e / m as f64, lam)
            .unwrap()
            .value;
        assert!((direct - eq).abs() < 1e-12, "{direct} vs {eq}");
    }
}
