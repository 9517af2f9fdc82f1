//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The x^{-1/2} endpoint singularity of the maxentropic input densities is
//! removed with the substitution `x = t^2`; semi-infinite ranges are mapped
//! onto `[0, 1)` with `x = a + s t / (1 - t)`. Neither map evaluates the
//! integrand at the transformed endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One GK15 panel on `[a, b]`, returning (kronrod estimate, |K - G|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    estimate: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Tolerance settings for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Number of equal panels the range is split into before adapting.
    pub initial_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_panels: 4000,
            initial_panels: 4,
        }
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integral of `f` over the finite range `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        if b < a {
            return self.integrate(f, b, a).map(|v| -v);
        }
        let n0 = self.initial_panels.max(1);
        let width = (b - a) / n0 as f64;
        let mut heap = BinaryHeap::with_capacity(self.max_panels + n0);
        let (mut total, mut total_err) = (0.0, 0.0);
        for i in 0..n0 {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            let (estimate, error) = gk15(&f, lo, hi);
            total += estimate;
            total_err += error;
            heap.push(Panel {
                a: lo,
                b: hi,
                estimate,
                error,
            });
        }
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if heap.len() >= self.max_panels || !total.is_finite() {
                return Err(Error::Quadrature {
                    estimate: total,
                    error: total_err,
                    intervals: heap.len(),
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel cannot be split further in floating point.
                return Err(Error::Quadrature {
                    estimate: total,
                    error: total_err,
                    intervals: heap.len() + 1,
                });
            }
            let (e1, r1) = gk15(&f, worst.a, mid);
            let (e2, r2) = gk15(&f, mid, worst.b);
            total += e1 + e2 - worst.estimate;
            total_err += r1 + r2 - worst.error;
            heap.push(Panel {
                a: worst.a,
                b: mid,
                estimate: e1,
                error: r1,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                estimate: e2,
                error: r2,
            });
        }
        // Re-sum to shed the drift of the running updates.
        Ok(heap.iter().map(|p| p.estimate).sum())
    }

    /// Integral of `f` over `[a, inf)`, `scale` setting where the bulk lies.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64, scale: f64) -> Result<f64> {
        let g = |t: f64| {
            let one_minus = 1.0 - t;
            let x = a + scale * t / one_minus;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (one_minus * one_minus)
            }
        };
        self.integrate(g, 0.0, 1.0)
    }

    /// Integral over `[0, b]` of an `f` that may blow up like `x^{-1/2}` at 0.
    pub fn integrate_sqrt_singular<F: Fn(f64) -> f64>(&self, f: F, b: f64) -> Result<f64> {
        self.integrate(|t| 2.0 * t * f(t * t), 0.0, b.sqrt())
    }

    /// Integral over `[0, inf)` of an `f` with an `x^{-1/2}` singularity at 0.
    pub fn integrate_sqrt_singular_to_infinity<F: Fn(f64) -> f64>(&self, f: F, scale: f64) -> Result<f64> {
        self.integrate_to_infinity(|t| 2.0 * t * f(t * t), 0.0, scale.sqrt())
    }
}
