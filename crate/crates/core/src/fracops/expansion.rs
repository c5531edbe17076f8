//! Fractional derivatives of reconstructions written as finite sums of
//! shifted power functions anchored at grid nodes.
//!
//! A piecewise linear function is an affine function plus ramps
//! `(s - t_k)_+` and a left-continuous step function is a constant plus
//! jumps `1_{s > t_k}`; each of these has an explicit fractional derivative.
//! The Weyl-form operators agree with these sums at grid points, and the
//! sums also give the derivative strictly inside a cell, which the
//! product quadrature of the integral evaluator relies on.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::{FracOrder, Reconstruction};
use crate::error::{Error, Result};
use crate::paths::SampledPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Terms `coeff * (s - t_node)^exponent` for `s > t_node`.
    Left,
    /// Terms `coeff * (t_node - s)^exponent` for `s < t_node`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub node: usize,
    pub exponent: f64,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerExpansion {
    pub side: Side,
    pub times: Vec<f64>,
    /// Sorted by node.
    pub terms: Vec<PowerTerm>,
}

impl PowerExpansion {
    /// Value at `s`; terms anchored exactly at `s` are excluded.
    pub fn eval(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .filter_map(|term| {
                let d = match self.side {
                    Side::Left => s - self.times[term.node],
                    Side::Right => self.times[term.node] - s,
                };
                (d > 0.0).then(|| term.coeff * d.powf(term.exponent))
            })
            .sum()
    }

    /// Terms anchored at `node`.
    pub fn terms_at(&self, node: usize) -> &[PowerTerm] {
        let lo = self.terms.partition_point(|t| t.node < node);
        let hi = self.terms.partition_point(|t| t.node <= node);
        &self.terms[lo..hi]
    }
}

/// Expansion of `D^β_{0+} f̃` for the reconstruction `f̃` of `f`.
pub fn left_expansion(f: &SampledPath, order: FracOrder, recon: Reconstruction) -> PowerExpansion {
    let beta = order.value();
    let t = f.times();
    let x = f.values();
    let n = f.len();
    let g0 = gamma(1.0 - beta);
    let g1 = gamma(2.0 - beta);
    let mut terms = vec![PowerTerm { node: 0, exponent: -beta, coeff: x[0] / g0 }];
    match recon {
        Reconstruction::PiecewiseLinear => {
            let slope = |k: usize| (x[k + 1] - x[k]) / (t[k + 1] - t[k]);
            terms.push(PowerTerm { node: 0, exponent: 1.0 - beta, coeff: slope(0) / g1 });
            for k in 1..n - 1 {
                terms.push(PowerTerm {
                    node: k,
                    exponent: 1.0 - beta,
                    coeff: (slope(k) - slope(k - 1)) / g1,
                });
            }
        }
        Reconstruction::PiecewiseConstantLeft => {
            for k in 1..n - 1 {
                terms.push(PowerTerm { node: k, exponent: -beta, coeff: (x[k] - x[k - 1]) / g0 });
            }
        }
    }
    PowerExpansion { side: Side::Left, times: t.to_vec(), terms }
}

/// Expansion of the real-valued `D^α_{t-} g_{t-}` (same sign convention as
/// [`super::frac_deriv_right`]); nodes beyond `t` are dropped.
pub fn right_expansion(
    g: &SampledPath,
    order: FracOrder,
    t_end: f64,
    recon: Reconstruction,
) -> Result<PowerExpansion> {
    let end = g
        .index_of(t_end)
        .filter(|&i| i > 0)
        .ok_or_else(|| Error::Validation(format!("t = {t_end} is not a positive grid point")))?;
    let alpha = order.value();
    let t = &g.times()[..=end];
    let x = &g.values()[..=end];
    let mut terms = Vec::with_capacity(end);
    match recon {
        Reconstruction::PiecewiseLinear => {
            let g1 = gamma(2.0 - alpha);
            let slope = |k: usize| (x[k + 1] - x[k]) / (t[k + 1] - t[k]);
            for k in 1..end {
                terms.push(PowerTerm {
                    node: k,
                    exponent: 1.0 - alpha,
                    coeff: (slope(k - 1) - slope(k)) / g1,
                });
            }
            terms.push(PowerTerm { node: end, exponent: 1.0 - alpha, coeff: slope(end - 1) / g1 });
        }
        Reconstruction::PiecewiseConstantLeft => {
            let g0 = gamma(1.0 - alpha);
            for k in 1..end {
                terms.push(PowerTerm { node: k, exponent: -alpha, coeff: (x[k] - x[k - 1]) / g0 });
            }
        }
    }
    Ok(PowerExpansion { side: Side::Right, times: t.to_vec(), terms })
}
