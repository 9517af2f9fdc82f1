//! Named verification suites run by `laguerre verify`.
//!
//! Each check reduces to one number that must not exceed its tolerance, so
//! a suite result prints as a table of `(name, value, tolerance)` rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    average_lower, lower_bound, peak_average_lower, peak_lower, ExponentialInput, MaxentDensity, PowerConstraints,
};
use crate::cdma::{alpha_star, cdma_lower_bound, CdmaConfig, NoiseTracking};
use crate::channel::{log_pmf, moments, pmf_row, stream_seed, ChannelParams};
use crate::error::{Error, Result};
use crate::verify::{
    bernoulli_pmf, blahut_arimoto, check_composition_lemma, check_degradation, check_exp_mixing, check_exp_mixing_cdma,
    exponential_input_mi, geometric_cover, input_grid, mi_monte_carlo, poisson_pmf, DiscreteChannel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Pmf,
    Limits,
    Mixing,
    Degradation,
    Sandwich,
    MonteCarlo,
    Cdma,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Pmf,
        Suite::Limits,
        Suite::Mixing,
        Suite::Degradation,
        Suite::Sandwich,
        Suite::MonteCarlo,
        Suite::Cdma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Pmf => "pmf",
            Suite::Limits => "limits",
            Suite::Mixing => "mixing",
            Suite::Degradation => "degradation",
            Suite::Sandwich => "sandwich",
            Suite::MonteCarlo => "montecarlo",
            Suite::Cdma => "cdma",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(suite: Suite, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

const X_GRID: [f64; 6] = [0.0, 0.5, 1.0, 5.0, 20.0, 100.0];
const LAMBDA_GRID: [f64; 3] = [0.1, 1.0, 5.0];

fn pmf_suite() -> Result<Vec<CheckOutcome>> {
    let (mut norm, mut mean, mut var) = (0.0f64, 0.0f64, 0.0f64);
    for &x in &X_GRID {
        for &l in &LAMBDA_GRID {
            let p = ChannelParams::new(l)?;
            let row = pmf_row(x, p, 1e-15)?;
            let (m, v) = moments(x, p)?;
            norm = norm.max((row.total() - 1.0).abs());
            mean = mean.max((row.mean() - m).abs());
            var = var.max((row.variance() - v).abs());
        }
    }
    Ok(vec![
        CheckOutcome::new(Suite::Pmf, "normalisation", norm, 1e-9),
        CheckOutcome::new(Suite::Pmf, "mean", mean, 1e-6),
        CheckOutcome::new(Suite::Pmf, "variance", var, 1e-6),
    ])
}

fn limits_suite() -> Result<Vec<CheckOutcome>> {
    let small = ChannelParams::new(1e-8)?;
    let mut tv = 0.0f64;
    for &x in &[0.5, 4.0, 20.0] {
        let row = pmf_row(x, small, 1e-14)?;
        let pois = poisson_pmf(x, 1e-16);
        let n = row.probs.len().max(pois.len());
        let gap: f64 = (0..n)
            .map(|y| (row.probs.get(y).copied().unwrap_or(0.0) - pois.get(y).copied().unwrap_or(0.0)).abs())
            .sum();
        tv = tv.max(0.5 * gap);
    }
    let mut geo = 0.0f64;
    for &l in &LAMBDA_GRID {
        let p = ChannelParams::new(l)?;
        let r = l / (1.0 + l);
        for y in 0..=geometric_cover(l, 1e-12) as u64 {
            let exact = r.powi(y as i32) / (1.0 + l);
            geo = geo.max((log_pmf(y, 0.0, p)?.exp() - exact).abs() / exact);
        }
    }
    Ok(vec![
        CheckOutcome::new(Suite::Limits, "poisson_tv", tv, 1e-5),
        CheckOutcome::new(Suite::Limits, "geometric_rel", geo, 1e-12),
    ])
}

fn mixing_suite() -> Result<Vec<CheckOutcome>> {
    let mut worst = 0.0f64;
    for &eta in &[0.5, 2.0, 10.0] {
        for &l in &[0.5, 2.0] {
            let y_max = geometric_cover(eta + l, 1e-9);
            worst = worst.max(check_exp_mixing(eta, l, y_max)?);
        }
    }
    let cfg = CdmaConfig::new(10, 31, 5.0)?;
    let eff = cfg.effective_params();
    let cdma = check_exp_mixing_cdma(&cfg, geometric_cover(cfg.eta * eff.gain + eff.noise_mean, 1e-9))?;
    Ok(vec![
        CheckOutcome::new(Suite::Mixing, "exp_to_geometric", worst, 1e-8),
        CheckOutcome::new(Suite::Mixing, "exp_to_geometric_cdma", cdma, 1e-8),
    ])
}

fn degradation_suite() -> Result<Vec<CheckOutcome>> {
    let z: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).chain(std::iter::once(1.0)).collect();
    let mut worst = 0.0f64;
    for &x in &[0.0, 0.5, 5.0, 20.0] {
        for &l in &[0.1, 1.0, 5.0] {
            worst = worst.max(check_degradation(x, l, &z)?);
        }
    }
    let (a, q) = (6.0, 0.3);
    let composed = check_composition_lemma(&poisson_pmf(a, 1e-17), &bernoulli_pmf(q), &z)?;
    // The composed law must also be Poisson(aq) itself.
    let thinned = crate::verify::compose_counts(&poisson_pmf(a, 1e-17), &bernoulli_pmf(q));
    let target = poisson_pmf(a * q, 1e-17);
    let law_gap = (0..thinned.len().max(target.len()))
        .map(|k| (thinned.get(k).copied().unwrap_or(0.0) - target.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0f64, f64::max);
    Ok(vec![
        CheckOutcome::new(Suite::Degradation, "laguerre_pgf", worst, 1e-10),
        CheckOutcome::new(Suite::Degradation, "composition_pgf", composed, 1e-10),
        CheckOutcome::new(Suite::Degradation, "thinning_law", law_gap, 1e-10),
    ])
}

/// Blahut-Arimoto stopping gap. The returned value is within this of the
/// discretised optimum, far inside the 0.01-0.02 nat margins it is used with;
/// tightening it to 1e-5 costs roughly ten times the run time.
pub const BA_TOL: f64 = 1e-4;

/// BA capacity on `points` levels of `[0, top]` with an optional cap.
pub fn ba_capacity(top: f64, avg_cap: Option<f64>, lambda: f64, points: usize) -> Result<f64> {
    let ch = DiscreteChannel::laguerre(input_grid(top, points)?, ChannelParams::new(lambda)?, 1e-10)?;
    Ok(blahut_arimoto(&ch, avg_cap, BA_TOL, 1_000_000)?.capacity)
}

fn sandwich_suite() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    // (label, grid top, average cap, closed-form lower bound)
    let cases = [
        ("peak_avg", 50.0, Some(10.0), peak_average_lower(50.0, 10.0, 1.0)?.value),
        ("avg_only", 20.0, Some(5.0), average_lower(5.0, 1.0)?.value),
    ];
    for (label, top, cap, lb) in cases {
        let coarse = ba_capacity(top, cap, 1.0, 64)?;
        let fine = ba_capacity(top, cap, 1.0, 128)?;
        out.push(CheckOutcome::new(
            Suite::Sandwich,
            format!("{label}_lb_minus_ba"),
            lb - coarse,
            0.02,
        ));
        out.push(CheckOutcome::new(
            Suite::Sandwich,
            format!("{label}_grid_refinement"),
            (fine - coarse).abs(),
            0.01,
        ));
    }
    Ok(out)
}

fn montecarlo_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let params = ChannelParams::new(1.0)?;
    let both = PowerConstraints::both(50.0, 10.0)?;
    let cases = [
        (
            "peak_avg",
            MaxentDensity::for_constraints(&both)?,
            lower_bound(&both, params)?.value,
        ),
        (
            "peak_only",
            MaxentDensity::peak_only(50.0)?,
            peak_lower(50.0, 1.0)?.value,
        ),
        (
            "avg_only",
            MaxentDensity::avg_only(5.0)?,
            average_lower(5.0, 1.0)?.value,
        ),
    ];
    let mut out = Vec::new();
    for (k, (label, density, lb)) in cases.into_iter().enumerate() {
        let est = mi_monte_carlo(&density, params, 100_000, stream_seed(seed, k as u64))?;
        out.push(CheckOutcome::new(
            Suite::MonteCarlo,
            format!("{label}_lb_minus_mi_3se"),
            lb - (est.value + 3.0 * est.stderr),
            0.0,
        ));
    }
    let exact = exponential_input_mi(3.0, params)?;
    let est = mi_monte_carlo(&ExponentialInput { mean: 3.0 }, params, 20_000, stream_seed(seed, 99))?;
    out.push(CheckOutcome::new(
        Suite::MonteCarlo,
        "exponential_calibration_in_se",
        (est.value - exact).abs() / est.stderr,
        3.0,
    ));
    Ok(out)
}

fn cdma_suite() -> Result<Vec<CheckOutcome>> {
    let c = PowerConstraints::both(100.0, 10.0)?;
    let users = [2u32, 5, 10, 50, 200];
    let values = users
        .iter()
        .map(|&m| cdma_lower_bound(&c, m, 31, NoiseTracking::Cap).map(|b| b.bound.value))
        .collect::<Result<Vec<f64>>>()?;
    let rise = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut alpha_gap = 0.0f64;
    for &m in &users {
        let a = alpha_star(&c, m, 31, NoiseTracking::Cap)?;
        if !(a > 0.0 && a <= 1.0 / 3.0) {
            alpha_gap = alpha_gap.max(1.0);
        }
    }
    Ok(vec![
        CheckOutcome::new(Suite::Cdma, "per_user_increase_in_m", rise, 0.0),
        CheckOutcome::new(Suite::Cdma, "alpha_star_outside_range", alpha_gap, 0.0),
    ])
}

/// Run one suite (or all of them). `seed` drives the Monte-Carlo checks.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::Pmf => pmf_suite(),
        Suite::Limits => limits_suite(),
        Suite::Mixing => mixing_suite(),
        Suite::Degradation => degradation_suite(),
        Suite::Sandwich => sandwich_suite(),
        Suite::MonteCarlo => montecarlo_suite(seed),
        Suite::Cdma => cdma_suite(),
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                all.extend(run_suite(s, seed)?);
            }
            Ok(all)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::EACH {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn cheap_suites_pass() {
        for s in [Suite::Pmf, Suite::Limits, Suite::Degradation] {
            for c in run_suite(s, 1).unwrap() {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
