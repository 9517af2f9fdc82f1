//! Generating-function and mixing identities, checked numerically.

use crate::bounds::{ExponentialInput, InputLaw};
use crate::cdma::CdmaConfig;
use crate::channel::{log_pmf, ChannelParams, Pgf};
use crate::error::{ensure_nonneg, Error, Result};

fn check_grid(z_grid: &[f64]) -> Result<()> {
    match z_grid.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        Some(z) => Err(Error::Domain(format!("z = {z} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Max over `z_grid` of
/// `|Psi_Laguerre(z) - Psi_Poisson(Psi_birth_death(z)) * Psi_bose_einstein(z)|`,
/// with the Laguerre side summed as a series over its pmf.
pub fn check_degradation(x: f64, lambda: f64, z_grid: &[f64]) -> Result<f64> {
    ensure_nonneg("x", x)?;
    ensure_nonneg("lambda", lambda)?;
    check_grid(z_grid)?;
    let lag = Pgf::Laguerre { x, lambda };
    let pois = Pgf::Poisson { mean: x };
    let bd = Pgf::BirthDeath { lambda };
    let be = Pgf::BoseEinstein { lambda };
    z_grid.iter().try_fold(0.0f64, |worst, &z| {
        let lhs = lag.eval(z)?;
        let rhs = pois.eval(bd.eval(z)?)? * be.eval(z)?;
        Ok(worst.max((lhs - rhs).abs()))
    })
}

/// Smallest `y_max` with geometric(mean) mass beyond it at most `tail`.
pub fn geometric_cover(mean: f64, tail: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let r = mean / (1.0 + mean);
    // P(Y > y) = r^{y+1}
    ((tail.ln() / r.ln()).ceil() as usize).saturating_sub(1)
}

fn exp_mixing_residual(eta: f64, y_max: usize, row: impl Fn(u64, f64) -> f64, out_mean: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be > 0, got {eta}")));
    }
    if y_max < geometric_cover(out_mean, 1e-9) {
        return Err(Error::Parameter(format!(
            "y_max = {y_max} leaves more than 1e-9 of the geometric mass uncovered (need {})",
            geometric_cover(out_mean, 1e-9)
        )));
    }
    let law = ExponentialInput { mean: eta };
    let r = out_mean / (1.0 + out_mean);
    (0..=y_max as u64).try_fold(0.0f64, |worst, y| {
        let mixed = law.expect(&|x| row(y, x))?;
        let geometric = r.powi(y as i32) / (1.0 + out_mean);
        Ok(worst.max((mixed - geometric).abs()))
    })
}

/// Max over `y = 0..=y_max` of the gap between the channel output under an
/// exponential input of mean `eta` (by quadrature) and the geometric law of
/// mean `eta + lambda`.
pub fn check_exp_mixing(eta: f64, lambda: f64, y_max: usize) -> Result<f64> {
    let params = ChannelParams::new(lambda)?;
    exp_mixing_residual(
        eta,
        y_max,
        |y, x| log_pmf(y, x, params).map(f64::exp).unwrap_or(f64::NAN),
        eta + lambda,
    )
}

/// CDMA form of [`check_exp_mixing`]: input mean `cfg.eta` through gain
/// `1/M` and noise `beta * eta` should give a geometric law of mean
/// `eta / M + beta * eta`.
pub fn check_exp_mixing_cdma(cfg: &CdmaConfig, y_max: usize) -> Result<f64> {
    cfg.validate()?;
    let eff = cfg.effective_params();
    let params = ChannelParams::new(eff.noise_mean)?;
    exp_mixing_residual(
        cfg.eta,
        y_max,
        |y, x| log_pmf(y, x * eff.gain, params).map(f64::exp).unwrap_or(f64::NAN),
        cfg.eta * eff.gain + eff.noise_mean,
    )
}

/// `sum_k p[k] z^k`.
pub fn pgf_of(pmf: &[f64], z: f64) -> f64 {
    pmf.iter().rev().fold(0.0, |acc, &p| acc * z + p)
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Law of `Y = Y_1 + ... + Y_X` with `X ~ outer` and i.i.d. `Y_i ~ photon`:
/// each of the `X` photons independently produces its own output count.
pub fn compose_counts(outer: &[f64], photon: &[f64]) -> Vec<f64> {
    let mut power = vec![1.0];
    let mut total = vec![0.0; (outer.len().max(1) - 1) * (photon.len().max(1) - 1) + 1];
    for (x, &px) in outer.iter().enumerate() {
        if x > 0 {
            power = convolve(&power, photon);
        }
        for (t, &p) in total.iter_mut().zip(&power) {
            *t += px * p;
        }
    }
    total
}

/// Max over `z_grid` of `|Psi_tot(z) - Psi_1(Psi_2(z))|`, where `Psi_tot`
/// is the generating function of [`compose_counts`]`(outer, photon)`.
pub fn check_composition_lemma(outer: &[f64], photon: &[f64], z_grid: &[f64]) -> Result<f64> {
    check_grid(z_grid)?;
    if outer.is_empty() || photon.is_empty() {
        return Err(Error::Parameter("empty pmf".into()));
    }
    let total = compose_counts(outer, photon);
    Ok(z_grid.iter().fold(0.0f64, |worst, &z| {
        let lhs = pgf_of(&total, z);
        let rhs = pgf_of(outer, pgf_of(photon, z));
        worst.max((lhs - rhs).abs())
    }))
}

/// Poisson pmf truncated once the remaining mass is below `tail`.
pub fn poisson_pmf(mean: f64, tail: f64) -> Vec<f64> {
    let mut out = vec![(-mean).exp()];
    let mut acc = out[0];
    let mut k = 0usize;
    while 1.0 - acc > tail && k < 100_000 {
        k += 1;
        let next = out[k - 1] * mean / k as f64;
        out.push(next);
        acc += next;
        if next == 0.0 && k as f64 > mean {
            break;
        }
    }
    out
}

/// Single-photon kernel with generating function
/// `(z + l(1 - z)) / (1 + l(1 - z))`: `P(0) = l/(1+l)` and
/// `P(k) = (l/(1+l))^{k-1} / (1+l)^2` for `k >= 1`.
pub fn birth_death_pmf(lambda: f64, tail: f64) -> Vec<f64> {
    if lambda == 0.0 {
        return vec![0.0, 1.0];
    }
    let r = lambda / (1.0 + lambda);
    let mut out = vec![r];
    let mut acc = r;
    let mut k = 1;
    while 1.0 - acc > tail && k < 100_000 {
        let p = r.powi(k - 1) / (1.0 + lambda).powi(2);
        out.push(p);
        acc += p;
        k += 1;
    }
    out
}

/// Thinning kernel: each photon survives with probability `q`.
pub fn bernoulli_pmf(q: f64) -> Vec<f64> {
    vec![1.0 - q, q]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degradation_endpoints() {
        assert!(check_degradation(5.0, 2.0, &[1.0]).unwrap() < 1e-14);
        assert!(check_degradation(5.0, 2.0, &[0.0]).unwrap() < 1e-14);
        assert!(check_degradation(1.0, 1.0, &[1.2]).is_err());
    }

    #[test]
    fn exp_mixing_zero_count() {
        // int e^{-x/(1+l)}/(1+l) e^{-x/eta}/eta dx = 1/(1 + l + eta)
        let r = check_exp_mixing(1.0, 1.0, 60).unwrap();
        assert!(r < 1e-8);
        assert!(check_exp_mixing(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn identity_photon_kernel() {
        let outer = poisson_pmf(3.0, 1e-16);
        let composed = compose_counts(&outer, &[0.0, 1.0]);
        for (a, b) in composed.iter().zip(&outer) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn birth_death_kernel_pgf() {
        let k = birth_death_pmf(1.5, 1e-17);
        for &z in &[0.0, 0.4, 0.9, 1.0] {
            let expect = Pgf::BirthDeath { lambda: 1.5 }.eval(z).unwrap();
            assert!((pgf_of(&k, z) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn cover_is_tight() {
        let y = geometric_cover(2.0, 1e-9);
        let r: f64 = 2.0 / 3.0;
        assert!(r.powi(y as i32 + 1) <= 1e-9);
        assert!(r.powi(y as i32) > 1e-9);
    }
}
