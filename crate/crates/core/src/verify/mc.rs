use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{ExponentialInput, InputLaw};
use crate::channel::{draw, log_pmf, pmf_row, ChannelParams};
use crate::error::{Error, Result};
use crate::special::geometric_entropy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Mutual information estimate, nats.
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

/// Monte-Carlo estimate of `I(X;Y)` for input `law` over the channel.
///
/// Pairs `(X, Y)` are drawn from the law and the channel sampler; the output
/// marginal `R(y)` is computed by quadrature of the channel law against the
/// input law for each observed `y`. The estimate is the sample mean of
/// `log W(Y|X) - log R(Y)` and the error is its delete-one jackknife
/// standard error, which for a sample mean is `s / sqrt(n)`.
pub fn mi_monte_carlo(law: &dyn InputLaw, params: ChannelParams, n: usize, seed: u64) -> Result<MiEstimate> {
    if n < 1000 {
        return Err(Error::Parameter(format!("need at least 1000 samples, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(f64, u64)> = (0..n)
        .map(|_| {
            let x = law.sample_input(&mut rng);
            (x, draw(x, params.lambda, &mut rng))
        })
        .collect();

    let mut log_marginal = BTreeMap::new();
    for &(_, y) in &pairs {
        if let std::collections::btree_map::Entry::Vacant(slot) = log_marginal.entry(y) {
            let r = law.expect(&|x| log_pmf(y, x, params).map(f64::exp).unwrap_or(0.0))?;
            if !(r > 0.0) {
                return Err(Error::Quadrature {
                    estimate: r,
                    error: f64::NAN,
                    intervals: 0,
                });
            }
            slot.insert(r.ln());
        }
    }

    let terms = pairs
        .iter()
        .map(|&(x, y)| Ok(log_pmf(y, x, params)? - log_marginal[&y]))
        .collect::<Result<Vec<f64>>>()?;
    let nf = n as f64;
    let value = terms.iter().sum::<f64>() / nf;
    let var = terms.iter().map(|t| (t - value).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(MiEstimate {
        value,
        stderr: (var / nf).sqrt(),
        n,
        seed,
    })
}

/// `I(X;Y)` for an exponential input of mean `eta`: the output is geometric
/// with mean `eta + lambda`, so `I = H(geometric) - E[H(W(.|X))]`, the
/// second term by quadrature.
pub fn exponential_input_mi(eta: f64, params: ChannelParams) -> Result<f64> {
    let law = ExponentialInput { mean: eta };
    let cond = law.expect(&|x| pmf_row(x, params, 1e-13).map(|r| r.entropy()).unwrap_or(f64::NAN))?;
    Ok(geometric_entropy(eta + params.lambda) - cond)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::PointMass;

    #[test]
    fn point_mass_carries_no_information() {
        let est = mi_monte_carlo(&PointMass { x: 3.0 }, ChannelParams::new(1.0).unwrap(), 2000, 5).unwrap();
        assert!(est.value.abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        assert!(mi_monte_carlo(&PointMass { x: 3.0 }, ChannelParams::new(1.0).unwrap(), 999, 5).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let law = ExponentialInput { mean: 2.0 };
        let p = ChannelParams::new(0.5).unwrap();
        let a = mi_monte_carlo(&law, p, 3000, 11).unwrap();
        let b = mi_monte_carlo(&law, p, 3000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.stderr > 0.0);
    }

    #[test]
    fn exponential_input_estimate_matches_semi_analytic() {
        let p = ChannelParams::new(1.0).unwrap();
        let exact = exponential_input_mi(3.0, p).unwrap();
        let est = mi_monte_carlo(&ExponentialInput { mean: 3.0 }, p, 20_000, 1).unwrap();
        assert!((est.value - exact).abs() < 4.0 * est.stderr, "{est:?} vs {exact}");
    }
}
