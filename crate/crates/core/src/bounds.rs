//! Closed-form capacity bounds for the independent-noise channel.
//!
//! The lower bounds come from feeding the channel a maxentropic input
//! density, bounding `H(Y)` from below through the exponential/geometric
//! reference pair and `H(Y|X)` from above with the Gaussian entropy of the
//! law's variance. The upper bounds are the asymptotic Poisson-channel
//! bounds, inherited because the Laguerre channel is a degraded Poisson
//! channel; their `o(1)` remainders are dropped and the results flagged.
//!
//! All values are in nats.

use std::f64::consts::{E as EULER, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{ensure_nonneg, ensure_positive, Error, Result};
use crate::optimize::bisect;
use crate::quad::Quadrature;
use crate::special::{s_over_erf, truncated_gamma_half_mean};

/// Peak-to-average ratio at which the average constraint stops binding.
pub const ALPHA_THRESHOLD: f64 = 1.0 / 3.0;

/// Peak (`A`) and average (`E`) input power constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConstraints {
    pub peak: Option<f64>,
    pub average: Option<f64>,
}

/// Which constraints are present, with their values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Active {
    Both { peak: f64, average: f64 },
    Peak(f64),
    Average(f64),
}

impl PowerConstraints {
    pub fn new(peak: Option<f64>, average: Option<f64>) -> Result<Self> {
        let c = Self { peak, average };
        c.active()?;
        Ok(c)
    }

    pub fn peak_only(peak: f64) -> Result<Self> {
        Self::new(Some(peak), None)
    }

    pub fn average_only(average: f64) -> Result<Self> {
        Self::new(None, Some(average))
    }

    pub fn both(peak: f64, average: f64) -> Result<Self> {
        Self::new(Some(peak), Some(average))
    }

    pub fn active(&self) -> Result<Active> {
        match (self.peak, self.average) {
            (None, None) => Err(Error::Parameter(
                "at least one of the peak and average constraints is required".into(),
            )),
            (Some(a), None) => {
                ensure_positive("peak", a).map_err(to_param)?;
                Ok(Active::Peak(a))
            }
            (None, Some(e)) => {
                ensure_positive("average", e).map_err(to_param)?;
                Ok(Active::Average(e))
            }
            (Some(a), Some(e)) => {
                ensure_positive("peak", a).map_err(to_param)?;
                ensure_positive("average", e).map_err(to_param)?;
                if e > a {
                    return Err(Error::Parameter(format!(
                        "average {e} exceeds peak {a}; alpha must lie in (0, 1]"
                    )));
                }
                Ok(Active::Both { peak: a, average: e })
            }
        }
    }

    /// `E / A` when both constraints are present.
    pub fn alpha(&self) -> Option<f64> {
        match (self.peak, self.average) {
            (Some(a), Some(e)) => Some(e / a),
            _ => None,
        }
    }
}

fn to_param(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Parameter(m),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Both constraints, `alpha < 1/3`.
    PeakAvgSmallAlpha,
    /// Peak only, or both with `alpha >= 1/3`.
    PeakOnlyOrLargeAlpha,
    AvgOnly,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PeakAvgSmallAlpha => "peak_avg_small_alpha",
            Regime::PeakOnlyOrLargeAlpha => "peak_only_or_large_alpha",
            Regime::AvgOnly => "avg_only",
        }
    }

    pub fn of(constraints: &PowerConstraints) -> Result<Regime> {
        Ok(match constraints.active()? {
            Active::Both { peak, average } if average / peak < ALPHA_THRESHOLD => Regime::PeakAvgSmallAlpha,
            Active::Both { .. } | Active::Peak(_) => Regime::PeakOnlyOrLargeAlpha,
            Active::Average(_) => Regime::AvgOnly,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Bound value in nats.
    pub value: f64,
    pub regime: Regime,
    /// Shape parameter of the maxentropic input, when one was used.
    pub mu: Option<f64>,
    /// Set when the value omits a vanishing `o(1)` remainder.
    pub asymptotic: bool,
}

/// Upper bound on the entropy of a Laguerre count whose input has mean `eta`.
pub fn entropy_ub(eta: f64, lambda: f64) -> Result<f64> {
    ensure_nonneg("eta", eta)?;
    ensure_nonneg("lambda", lambda)?;
    let var = eta * (1.0 + 2.0 * lambda) + lambda * (1.0 + lambda);
    Ok(0.5 * (2.0 * PI * EULER * (var + 1.0 / 12.0)).ln())
}

/// Lower bound on `H(Y)` for an input of differential entropy `h_x` and
/// mean `eta`, from data processing against the exponential input.
pub fn output_entropy_lb(h_x: f64, eta: f64, lambda: f64) -> Result<f64> {
    ensure_positive("eta", eta)?;
    ensure_nonneg("lambda", lambda)?;
    Ok(h_x + output_entropy_correction(eta, lambda))
}

/// `log(1 + (1+l)/eta) + (eta+l) log(1 + 1/(eta+l)) - 1`.
fn output_entropy_correction(eta: f64, lambda: f64) -> f64 {
    let m = eta + lambda;
    ((1.0 + lambda) / eta).ln_1p() + m * (1.0 / m).ln_1p() - 1.0
}

/// `2 sqrt(r) atan(1/sqrt(r)) + log(1 + r)`: twice the average of
/// `log(1 + rA/x)` under `1/sqrt(4Ax)` on `[0, A]`.
fn log_penalty(r: f64) -> f64 {
    let s = r.sqrt();
    2.0 * s * (1.0 / s).atan() + r.ln_1p()
}

/// `(12 l (l+1) + 1) / (12 A (2l + 1))`.
fn penalty_ratio(peak: f64, lambda: f64) -> f64 {
    (12.0 * lambda * (lambda + 1.0) + 1.0) / (12.0 * peak * (2.0 * lambda + 1.0))
}

/// Rule for choosing the shape parameter `mu` of the truncated maxentropic
/// input `x^{-1/2} e^{-mu x / A}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuRule {
    /// The `mu` for which the density's mean equals `alpha * A`. Used by
    /// every bound in this crate.
    MeanMatched,
    /// Stationary point `1/(2 alpha) - 1/(1 - alpha)` of
    /// `-(1 - alpha) mu - log(1/2 - alpha mu)`.
    Stationary,
}

/// Shape parameter for peak-to-average ratio `alpha` in `(0, 1/3)`.
pub fn solve_mu(alpha: f64, rule: MuRule) -> Result<f64> {
    if !(alpha > 0.0 && alpha < ALPHA_THRESHOLD) {
        return Err(Error::Regime {
            alpha,
            range: "(0, 1/3)",
        });
    }
    match rule {
        MuRule::Stationary => Ok(0.5 / alpha - 1.0 / (1.0 - alpha)),
        MuRule::MeanMatched => {
            // The mean ratio falls from 1/3 and stays below 1/(2 mu).
            let hi = 0.5 / alpha + 1.0;
            bisect(|mu| truncated_gamma_half_mean(mu) - alpha, 0.0, hi, 1e-13 * hi)
        }
    }
}

/// `(log(1/2 - alpha mu), e^mu (1/2 - alpha mu))` for a mean-matched `mu`,
/// via `1/2 - alpha mu = sqrt(mu) e^{-mu} / (sqrt(pi) erf(sqrt(mu)))`.
/// Stable for `mu` in the thousands, where the raw difference underflows.
pub(crate) fn slack_terms(mu: f64) -> (f64, f64) {
    let scaled = s_over_erf(mu.sqrt()) / PI.sqrt();
    (scaled.ln() - mu, scaled)
}

/// `h(X) - E[log X]/2` of the mean-matched truncated input on `[0, A]`.
pub(crate) fn shaped_entropy(peak: f64, alpha: f64, mu: f64) -> f64 {
    let (log_slack, _) = slack_terms(mu);
    0.5 * peak.ln() - (1.0 - alpha) * mu - log_slack
}

/// Lower bound with both constraints and `alpha = E/A < 1/3`.
pub fn peak_average_lower(peak: f64, average: f64, lambda: f64) -> Result<BoundResult> {
    ensure_positive("peak", peak)?;
    ensure_positive("average", average)?;
    ensure_nonneg("lambda", lambda)?;
    let alpha = average / peak;
    let mu = solve_mu(alpha, MuRule::MeanMatched)?;
    let (_, scaled) = slack_terms(mu);
    let value = shaped_entropy(peak, alpha, mu)
        - scaled * log_penalty(penalty_ratio(peak, lambda))
        - 0.5 * (2.0 * lambda + 1.0).ln()
        + output_entropy_correction(average, lambda)
        - 0.5 * (2.0 * PI * EULER).ln();
    Ok(BoundResult {
        value,
        regime: Regime::PeakAvgSmallAlpha,
        mu: Some(mu),
        asymptotic: false,
    })
}

/// Lower bound when only the peak constraint binds (input `1/sqrt(4Ax)`).
pub fn peak_lower(peak: f64, lambda: f64) -> Result<BoundResult> {
    ensure_positive("peak", peak)?;
    ensure_nonneg("lambda", lambda)?;
    let r = penalty_ratio(peak, lambda);
    let s = r.sqrt();
    let value = 0.5 * peak.ln() + (3.0 * (1.0 + lambda) / peak).ln_1p() - 1.0 - 0.5 * (PI * EULER / 2.0).ln()
        + (peak / 3.0 + lambda) * (3.0 / (peak + 3.0 * lambda)).ln_1p()
        - 0.5 * (2.0 * lambda + 1.0).ln()
        - s * (1.0 / s).atan()
        - 0.5 * r.ln_1p();
    Ok(BoundResult {
        value,
        regime: Regime::PeakOnlyOrLargeAlpha,
        mu: None,
        asymptotic: false,
    })
}

/// Lower bound under an average constraint alone.
pub fn average_lower(average: f64, lambda: f64) -> Result<BoundResult> {
    ensure_positive("average", average)?;
    ensure_nonneg("lambda", lambda)?;
    let c = 12.0 * PI * lambda * (lambda + 1.0) + PI;
    let value = 0.5 * average.ln() - (c / (24.0 * average * (2.0 * lambda + 1.0))).sqrt()
        + ((1.0 + lambda) / average).ln_1p()
        + (average + lambda) * (1.0 / (average + lambda)).ln_1p()
        - 0.5 * (2.0 * lambda + 1.0).ln()
        - 1.0;
    Ok(BoundResult {
        value,
        regime: Regime::AvgOnly,
        mu: None,
        asymptotic: false,
    })
}

/// Capacity lower bound for the given constraints.
pub fn lower_bound(constraints: &PowerConstraints, params: ChannelParams) -> Result<BoundResult> {
    let lambda = params.lambda;
    ensure_nonneg("lambda", lambda)?;
    match constraints.active()? {
        Active::Both { peak, average } if average / peak < ALPHA_THRESHOLD => peak_average_lower(peak, average, lambda),
        Active::Both { peak, .. } | Active::Peak(peak) => peak_lower(peak, lambda),
        Active::Average(average) => average_lower(average, lambda),
    }
}

/// Asymptotic capacity upper bound (the `o(1)` term is dropped).
pub fn upper_bound(constraints: &PowerConstraints) -> Result<BoundResult> {
    let (value, regime, mu) = match constraints.active()? {
        Active::Both { peak, average } if average / peak < ALPHA_THRESHOLD => {
            let alpha = average / peak;
            let mu = solve_mu(alpha, MuRule::MeanMatched)?;
            (
                shaped_entropy(peak, alpha, mu) - 0.5 * (2.0 * PI * EULER).ln(),
                Regime::PeakAvgSmallAlpha,
                Some(mu),
            )
        }
        Active::Both { peak, .. } | Active::Peak(peak) => (
            0.5 * peak.ln() - 0.5 * (PI * EULER / 2.0).ln(),
            Regime::PeakOnlyOrLargeAlpha,
            None,
        ),
        Active::Average(average) => (0.5 * average.ln(), Regime::AvgOnly, None),
    };
    Ok(BoundResult {
        value,
        regime,
        mu,
        asymptotic: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxentRegime {
    Both,
    PeakOnly,
    AvgOnly,
}

/// Input density maximising `h(X) - E[log X]/2` under the active constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxentDensity {
    pub regime: MaxentRegime,
    pub peak: Option<f64>,
    pub average: Option<f64>,
    pub mu: Option<f64>,
}

/// Anything with a law on `[0, inf)` that can be sampled and integrated
/// against. Used as the input of the Monte-Carlo information estimator.
pub trait InputLaw {
    fn sample_input(&self, rng: &mut dyn rand::RngCore) -> f64;

    /// `E[f(X)]`.
    fn expect(&self, f: &dyn Fn(f64) -> f64) -> Result<f64>;
}

impl MaxentDensity {
    /// Validated constructor. `both` needs `peak`, `average` and a `mu`
    /// with `alpha mu < 1/2` whose mean respects the average constraint.
    pub fn new(regime: MaxentRegime, peak: Option<f64>, average: Option<f64>, mu: Option<f64>) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Parameter(format!("{name} is required for {regime:?}")))
        };
        match regime {
            MaxentRegime::Both => {
                let a = need(peak, "peak")?;
                let e = need(average, "average")?;
                let m = need(mu, "mu")?;
                ensure_positive("peak", a).map_err(to_param)?;
                ensure_positive("average", e).map_err(to_param)?;
                ensure_nonneg("mu", m).map_err(to_param)?;
                if (e / a) * m >= 0.5 {
                    return Err(Error::Parameter(format!("alpha * mu = {} must be < 1/2", e / a * m)));
                }
                if a * truncated_gamma_half_mean(m) > e * (1.0 + 1e-9) {
                    return Err(Error::Parameter(format!(
                        "density mean {} exceeds the average constraint {e}",
                        a * truncated_gamma_half_mean(m)
                    )));
                }
            }
            MaxentRegime::PeakOnly => {
                ensure_positive("peak", need(peak, "peak")?).map_err(to_param)?;
            }
            MaxentRegime::AvgOnly => {
                ensure_positive("average", need(average, "average")?).map_err(to_param)?;
            }
        }
        Ok(Self {
            regime,
            peak,
            average,
            mu,
        })
    }

    pub fn peak_only(peak: f64) -> Result<Self> {
        Self::new(MaxentRegime::PeakOnly, Some(peak), None, None)
    }

    pub fn avg_only(average: f64) -> Result<Self> {
        Self::new(MaxentRegime::AvgOnly, None, Some(average), None)
    }

    /// The density the lower bound for `constraints` is built on.
    pub fn for_constraints(constraints: &PowerConstraints) -> Result<Self> {
        match constraints.active()? {
            Active::Both { peak, average } if average / peak < ALPHA_THRESHOLD => {
                let mu = solve_mu(average / peak, MuRule::MeanMatched)?;
                Self::new(MaxentRegime::Both, Some(peak), Some(average), Some(mu))
            }
            Active::Both { peak, .. } | Active::Peak(peak) => Self::peak_only(peak),
            Active::Average(average) => Self::avg_only(average),
        }
    }

    /// Support upper end; `None` for `[0, inf)`.
    pub fn support_end(&self) -> Option<f64> {
        match self.regime {
            MaxentRegime::AvgOnly => None,
            _ => self.peak,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if x == 0.0 { f64::INFINITY } else { 0.0 };
        }
        match self.regime {
            MaxentRegime::Both => {
                let a = self.peak.unwrap();
                let mu = self.mu.unwrap();
                if x > a {
                    return 0.0;
                }
                s_over_erf(mu.sqrt()) / (PI * a * x).sqrt() * (-mu * x / a).exp()
            }
            MaxentRegime::PeakOnly => {
                let a = self.peak.unwrap();
                if x > a {
                    0.0
                } else {
                    1.0 / (4.0 * a * x).sqrt()
                }
            }
            MaxentRegime::AvgOnly => {
                let e = self.average.unwrap();
                (-x / (2.0 * e)).exp() / (2.0 * PI * e * x).sqrt()
            }
        }
    }

    /// `int pdf(x) f(x) dx` by adaptive quadrature after `x = t^2`.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let q = Quadrature::new(1e-14, 1e-11);
        let g = |x: f64| {
            let d = self.pdf(x);
            if d < NEGLIGIBLE_DENSITY {
                0.0
            } else {
                d * f(x)
            }
        };
        match self.regime {
            MaxentRegime::AvgOnly => q.integrate_sqrt_singular_to_infinity(g, 2.0 * self.average.unwrap()),
            MaxentRegime::PeakOnly => q.integrate_sqrt_singular(g, self.peak.unwrap()),
            MaxentRegime::Both => {
                let a = self.peak.unwrap();
                let mu = self.mu.unwrap();
                // For large mu the mass sits within a few A/mu of the origin;
                // break the t-range there so the first panels resolve it.
                let mut breaks: Vec<f64> = [1.0, 10.0, 60.0]
                    .iter()
                    .map(|k| k * a / mu.max(1.0))
                    .filter(|&b| b < a)
                    .collect();
                breaks.push(a);
                let mut total = 0.0;
                let mut lo = 0.0f64;
                for hi in breaks {
                    total += q.integrate(|t| 2.0 * t * g(t * t), lo.sqrt(), hi.sqrt())?;
                    lo = hi;
                }
                Ok(total)
            }
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.integrate(&|x| x)
    }

    /// Differential entropy in nats.
    pub fn differential_entropy(&self) -> Result<f64> {
        self.integrate(&|x| -self.pdf(x).ln())
    }

    /// `E[log X]`.
    pub fn mean_log(&self) -> Result<f64> {
        self.integrate(&|x| x.ln())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.regime {
            MaxentRegime::PeakOnly => {
                let u: f64 = rng.random();
                self.peak.unwrap() * u * u
            }
            MaxentRegime::AvgOnly => {
                let z: f64 = rng.sample(StandardNormal);
                self.average.unwrap() * z * z
            }
            MaxentRegime::Both => {
                // X = A s^2 with s on [0, 1] of density proportional to e^{-mu s^2}.
                let a = self.peak.unwrap();
                let mu = self.mu.unwrap();
                let s = if mu < 1.0 {
                    loop {
                        let s: f64 = rng.random();
                        let u: f64 = rng.random();
                        if u < (-mu * s * s).exp() {
                            break s;
                        }
                    }
                } else {
                    let sd = (0.5 / mu).sqrt();
                    loop {
                        let z: f64 = rng.sample::<f64, _>(StandardNormal);
                        let s = (z * sd).abs();
                        if s <= 1.0 {
                            break s;
                        }
                    }
                };
                a * s * s
            }
        }
    }
}

impl InputLaw for MaxentDensity {
    fn sample_input(&self, rng: &mut dyn rand::RngCore) -> f64 {
        self.sample(rng)
    }

    fn expect(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        self.integrate(f)
    }
}

/// Exponential input of the given mean; its channel output is geometric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialInput {
    pub mean: f64,
}

impl InputLaw for ExponentialInput {
    fn sample_input(&self, rng: &mut dyn rand::RngCore) -> f64 {
        let u: f64 = rng.random();
        -self.mean * (1.0 - u).ln()
    }

    fn expect(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let m = self.mean;
        let g = |x: f64| {
            let d = (-x / m).exp() / m;
            if d < NEGLIGIBLE_DENSITY {
                0.0
            } else {
                d * f(x)
            }
        };
        Quadrature::new(1e-14, 1e-11).integrate_to_infinity(g, 0.0, m)
    }
}

/// Density below which integrands are not evaluated. Far-tail abscissae of
/// the semi-infinite maps would otherwise ask for enormous pmf rows while
/// contributing nothing.
const NEGLIGIBLE_DENSITY: f64 = 1e-40;

/// Deterministic input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    pub x: f64,
}

impl InputLaw for PointMass {
    fn sample_input(&self, _rng: &mut dyn rand::RngCore) -> f64 {
        self.x
    }

    fn expect(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        ensure_nonneg("x", self.x)?;
        Ok(f(self.x))
    }
}
