use serde::{Deserialize, Serialize};

use super::DiscreteChannel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaResult {
    /// Mutual information of the final input law, nats.
    pub capacity: f64,
    pub input_law: Vec<f64>,
    /// Lagrange multiplier on the input cost (0 when the cap is slack).
    pub multiplier: f64,
    pub average_input: f64,
    /// Iterations of the final inner run.
    pub iterations: usize,
    /// `max_x v(x) - E_p[v(X)]` at exit, which bounds the distance to the
    /// optimum of the penalised objective.
    pub gap: f64,
    /// Penalised objective `I(p) - s E_p[X]` after each step of the final
    /// inner run.
    pub trace: Vec<f64>,
}

struct Prepared<'a> {
    ch: &'a DiscreteChannel,
    /// `sum_y W ln W` per input.
    neg_entropy: Vec<f64>,
}

impl<'a> Prepared<'a> {
    fn new(ch: &'a DiscreteChannel) -> Self {
        let neg_entropy = ch
            .rows
            .iter()
            .map(|r| r.iter().filter(|&&w| w > 0.0).map(|&w| w * w.ln()).sum())
            .collect();
        Self { ch, neg_entropy }
    }

    /// Divergences `D(W(.|x) || q)` for the output law induced by `p`.
    fn divergences(&self, p: &[f64], ln_q: &mut [f64], d: &mut [f64]) {
        ln_q.fill(0.0);
        for (row, &px) in self.ch.rows.iter().zip(p) {
            if px == 0.0 {
                continue;
            }
            for (q, &w) in ln_q.iter_mut().zip(row) {
                *q += px * w;
            }
        }
        for q in ln_q.iter_mut() {
            *q = if *q > 0.0 { q.ln() } else { 0.0 };
        }
        for ((di, row), &h) in d.iter_mut().zip(&self.ch.rows).zip(&self.neg_entropy) {
            let cross: f64 = row.iter().zip(ln_q.iter()).map(|(&w, &lq)| w * lq).sum();
            *di = h - cross;
        }
    }

    /// Blahut-Arimoto for `max_p I(p) - s E_p[X]`, warm-started from `p`.
    fn solve(&self, s: f64, mut p: Vec<f64>, tol: f64, max_iter: usize) -> Result<BaResult> {
        let inputs = &self.ch.inputs;
        let mut ln_q = vec![0.0; self.ch.outputs()];
        let mut d = vec![0.0; inputs.len()];
        let mut v = vec![0.0; inputs.len()];
        let mut trace = Vec::new();
        for iter in 1..=max_iter {
            self.divergences(&p, &mut ln_q, &mut d);
            for ((vi, &di), &x) in v.iter_mut().zip(&d).zip(inputs) {
                *vi = di - s * x;
            }
            let lower: f64 = p.iter().zip(&v).map(|(pi, vi)| pi * vi).sum();
            let upper = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            trace.push(lower);
            let gap = upper - lower;
            if gap < tol {
                let capacity = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
                let average_input = p.iter().zip(inputs).map(|(pi, x)| pi * x).sum();
                return Ok(BaResult {
                    capacity,
                    input_law: p,
                    multiplier: s,
                    average_input,
                    iterations: iter,
                    gap,
                    trace,
                });
            }
            let mut total = 0.0;
            for (pi, &vi) in p.iter_mut().zip(&v) {
                *pi *= (vi - upper).exp();
                total += *pi;
            }
            p.iter_mut().for_each(|pi| *pi /= total);
            if iter == max_iter {
                return Err(Error::NotConverged { iterations: iter, gap });
            }
        }
        Err(Error::NotConverged {
            iterations: max_iter,
            gap: f64::NAN,
        })
    }
}

/// Capacity (nats) of a discrete channel, optionally with `E[X] <= avg_cap`.
///
/// The cap is enforced by bisecting the Lagrange multiplier until the
/// optimal input's mean matches it within `1e-6` relative. The reported law
/// is always feasible.
pub fn blahut_arimoto(ch: &DiscreteChannel, avg_cap: Option<f64>, tol: f64, max_iter: usize) -> Result<BaResult> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be > 0, got {tol}")));
    }
    let prep = Prepared::new(ch);
    let uniform = vec![1.0 / ch.inputs.len() as f64; ch.inputs.len()];
    let free = prep.solve(0.0, uniform, tol, max_iter)?;
    let cap = match avg_cap {
        None => return Ok(free),
        Some(c) if !(c > 0.0) => return Err(Error::Parameter(format!("average cap must be > 0, got {c}"))),
        Some(c) => c,
    };
    if free.average_input <= cap * (1.0 + 1e-6) {
        return Ok(free);
    }
    if ch.inputs[0] > cap {
        return Err(Error::Parameter(format!("no input level satisfies the cap {cap}")));
    }

    // Find a multiplier large enough to make the cap slack.
    let mut lo = (0.0, free);
    let mut s = 1.0 / cap;
    let mut hi = loop {
        let r = prep.solve(s, lo.1.input_law.clone(), tol, max_iter)?;
        if r.average_input <= cap {
            break (s, r);
        }
        lo = (s, r);
        s *= 2.0;
        if s > 1e12 {
            return Err(Error::NotConverged {
                iterations: 0,
                gap: lo.1.average_input - cap,
            });
        }
    };
    for _ in 0..200 {
        if (hi.1.average_input - cap).abs() <= 1e-6 * cap {
            break;
        }
        let mid = 0.5 * (lo.0 + hi.0);
        if mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let r = prep.solve(mid, hi.1.input_law.clone(), tol, max_iter)?;
        if r.average_input <= cap {
            hi = (mid, r);
        } else {
            lo = (mid, r);
        }
    }
    if (hi.1.average_input - cap).abs() <= 1e-6 * cap || lo.1.average_input <= cap {
        return Ok(hi.1);
    }
    // Inner runs stop at `tol`, so the mean is only piecewise monotone in
    // the multiplier and bisection can stall short of the cap. Mix the two
    // bracketing laws to land on it: mutual information is concave in the
    // input law, so the mixture is feasible and at least as good as the
    // matching combination of the two.
    let (m_lo, m_hi) = (lo.1.average_input, hi.1.average_input);
    let theta = (cap - m_hi) / (m_lo - m_hi);
    let law: Vec<f64> =
        lo.1.input_law
            .iter()
            .zip(&hi.1.input_law)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
    let mut ln_q = vec![0.0; ch.outputs()];
    let mut d = vec![0.0; ch.inputs.len()];
    prep.divergences(&law, &mut ln_q, &mut d);
    let mut out = hi.1;
    out.capacity = law.iter().zip(&d).map(|(pi, di)| pi * di).sum();
    out.average_input = law.iter().zip(&ch.inputs).map(|(pi, x)| pi * x).sum();
    out.input_law = law;
    Ok(out)
}
