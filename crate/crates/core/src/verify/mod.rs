//! Independent numerical oracles for the closed-form results.
//!
//! - [`blahut_arimoto`]: capacity of a discretised channel, optionally under
//!   an average-power cap.
//! - [`mi_monte_carlo`]: seeded Monte-Carlo mutual information for a given
//!   input law.
//! - [`check_degradation`], [`check_composition_lemma`]: the generating
//!   function identities behind the degraded-Poisson argument.
//! - [`check_exp_mixing`]: exponential input in, geometric output out.

mod blahut;
mod identities;
mod mc;

pub use blahut::{blahut_arimoto, BaResult};
pub use identities::{
    bernoulli_pmf, birth_death_pmf, check_composition_lemma, check_degradation, check_exp_mixing,
    check_exp_mixing_cdma, compose_counts, geometric_cover, pgf_of, poisson_pmf,
};
pub use mc::{exponential_input_mi, mi_monte_carlo, MiEstimate};

use serde::{Deserialize, Serialize};

use crate::channel::{pmf_row, pmf_row_fixed, ChannelParams};
use crate::error::{Error, Result};

/// Finite-input, truncated-output channel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteChannel {
    /// Sorted, distinct input levels.
    pub inputs: Vec<f64>,
    /// `rows[i][y]`, each row renormalised to sum to one.
    pub rows: Vec<Vec<f64>>,
    /// Largest mass dropped from any row before renormalising.
    pub tail_tol: f64,
}

impl DiscreteChannel {
    /// Channel from explicit rows; rows are renormalised.
    pub fn from_rows(inputs: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != rows.len() {
            return Err(Error::Parameter(format!(
                "{} inputs but {} rows",
                inputs.len(),
                rows.len()
            )));
        }
        if inputs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Parameter("inputs must be sorted and distinct".into()));
        }
        let width = rows[0].len();
        let mut dropped: f64 = 0.0;
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != width || row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::Parameter("rows must share a length and be nonnegative".into()));
            }
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                return Err(Error::Parameter("row with no mass".into()));
            }
            dropped = dropped.max(1.0 - total);
            out.push(row.into_iter().map(|p| p / total).collect());
        }
        Ok(Self {
            inputs,
            rows: out,
            tail_tol: dropped.max(0.0),
        })
    }

    /// Laguerre rows over a common `y_max` taken from the largest input.
    pub fn laguerre(inputs: Vec<f64>, params: ChannelParams, tail_tol: f64) -> Result<Self> {
        let top = inputs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::Parameter("empty input grid".into()));
        }
        let y_max = pmf_row(top, params, tail_tol)?.y_max();
        let rows = inputs
            .iter()
            .map(|&x| pmf_row_fixed(x, params, y_max).map(|r| r.probs))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(inputs, rows)
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }
}

/// `points` input levels: zero plus a geometric ladder ending at `peak`.
pub fn input_grid(peak: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(peak > 0.0) {
        return Err(Error::Parameter(format!(
            "grid needs peak > 0 and >= 2 points, got {peak}, {points}"
        )));
    }
    let steps = points - 1;
    let lo = peak / (points * points) as f64;
    let mut grid = vec![0.0];
    grid.extend((0..steps).map(|k| {
        if steps == 1 {
            peak
        } else {
            lo * (peak / lo).powf(k as f64 / (steps - 1) as f64)
        }
    }));
    *grid.last_mut().unwrap() = peak;
    Ok(grid)
}
