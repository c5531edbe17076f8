//! Riemann–Liouville fractional integrals, Weyl-form fractional derivatives,
//! fractional Besov norms and an empirical Garsia–Rodemich–Rumsey check.
//!
//! Every operator works on a reconstruction of the sampled function between
//! grid points (see [`Reconstruction`]) and integrates that reconstruction
//! against the singular kernel in closed form segment by segment.

mod besov;
mod expansion;
pub(crate) mod kernel;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{validation, Error, Result};
use crate::paths::SampledPath;
use kernel::{moments, UniformTable};

pub use besov::{
    besov_norm_w1, besov_norm_w1_with, besov_norm_w2, besov_norm_w2_with, grr_check,
    singular_double_integral, GrrCheck, NormReport, NORM_CAP,
};
pub use expansion::{left_expansion, right_expansion, PowerExpansion, PowerTerm, Side};

/// Fractional order in the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            validation(format!("fractional order must lie in (0,1), got {value}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The complementary order `1 - beta`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FracOrder> for f64 {
    fn from(o: FracOrder) -> f64 {
        o.0
    }
}

impl fmt::Display for FracOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How a sampled function is extended between grid points.
///
/// `PiecewiseConstantLeft` takes the value `f_k` on `(t_k, t_{k+1}]` and `f_0`
/// on `[0, t_1]`; it is left-continuous, so the reconstruction at a grid
/// point `t_i` equals the previous sample `f_{i-1}` and the last sample only
/// enters through difference quotients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    #[default]
    PiecewiseLinear,
    PiecewiseConstantLeft,
}

impl FromStr for Reconstruction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "piecewise_linear" => Ok(Self::PiecewiseLinear),
            "const" | "constant" | "piecewise_constant_left" => Ok(Self::PiecewiseConstantLeft),
            other => validation(format!("unknown reconstruction '{other}' (use linear or const)")),
        }
    }
}

impl fmt::Display for Reconstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PiecewiseLinear => "linear",
            Self::PiecewiseConstantLeft => "const",
        })
    }
}

/// `(I^β_{0+} f)(t_i)` at every grid point; the value at 0 is 0.
pub fn frac_integral_left(
    f: &SampledPath,
    order: FracOrder,
    recon: Reconstruction,
) -> Result<SampledPath> {
    let beta = order.value();
    let e = beta - 1.0;
    let t = f.times();
    let x = f.values();
    let n = f.len();
    let norm = 1.0 / gamma(beta);
    let table = f.uniform_step().map(|h| UniformTable::new(e, h, 1, n - 1));
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = t[i];
            let mut acc = 0.0;
            for k in 0..i {
                // Segment k spans distances v = s - u in [s - t_{k+1}, s - t_k].
                let mo = match &table {
                    Some(tab) => tab.at(i - k),
                    None => moments(e, s - t[k + 1], s - t[k]),
                };
                acc += match recon {
                    Reconstruction::PiecewiseLinear => mo.linear(x[k + 1], x[k]),
                    Reconstruction::PiecewiseConstantLeft => x[k] * mo.j0,
                };
            }
            acc * norm
        })
        .collect();
    finish(f, out, "frac_integral_left")
}

/// Weyl-form left derivative `(D^β_{0+} f)(t_i)` at every grid point.
///
/// The value at index 0 is a copy of the value at index 1.
pub fn frac_deriv_left(
    f: &SampledPath,
    order: FracOrder,
    recon: Reconstruction,
) -> Result<SampledPath> {
    let beta = order.value();
    let e = -beta - 1.0;
    let t = f.times();
    let x = f.values();
    let n = f.len();
    let norm = 1.0 / gamma(1.0 - beta);
    let table = f.uniform_step().map(|h| UniformTable::new(e, h, 2, n - 1));
    let mut out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let s = t[i];
            let mut acc = 0.0;
            let fs = match recon {
                Reconstruction::PiecewiseLinear => {
                    let h = s - t[i - 1];
                    acc += (x[i] - x[i - 1]) * h.powf(-beta) / (1.0 - beta);
                    x[i]
                }
                Reconstruction::PiecewiseConstantLeft => x[i - 1],
            };
            // Segments k <= i - 2 are separated from s by at least one cell.
            for k in 0..i.saturating_sub(1) {
                let mo = match &table {
                    Some(tab) => tab.at(i - k),
                    None => moments(e, s - t[k + 1], s - t[k]),
                };
                acc += match recon {
                    Reconstruction::PiecewiseLinear => {
                        (fs - x[k + 1]) * mo.j0 - (x[k] - x[k + 1]) * mo.j1
                    }
                    Reconstruction::PiecewiseConstantLeft => (fs - x[k]) * mo.j0,
                };
            }
            (fs * s.powf(-beta) + beta * acc) * norm
        })
        .collect();
    out[0] = out[1];
    finish(f, out, "frac_deriv_left")
}

/// Weyl-form right derivative `(D^α_{t-} g_{t-})(s)` of `g_{t-}(s) = g(s) - g(t-)`
/// at the grid points `s <= t`, returned on the grid truncated at `t`.
///
/// The result is real-valued: it is minus the bracketed Weyl expression, the
/// sign under which `∫ D^β f · D^{1-β}_{t-} g_{t-} ds` reproduces the
/// Riemann–Stieltjes integral `∫ f dg` for smooth functions. For linear `g` on
/// `[0, 1]` and `t = 1` this gives `(1 - s)^{1-α} / Γ(2 - α)`.
///
/// With the left-continuous constant reconstruction `g(t-)` is `g_{K-1}` and
/// the value at a grid point `s = t_i` is the limit from the right. The value
/// at `s = t` is 0.
pub fn frac_deriv_right(
    g: &SampledPath,
    order: FracOrder,
    t_end: f64,
    recon: Reconstruction,
) -> Result<SampledPath> {
    let end = g.index_of(t_end).ok_or_else(|| {
        Error::Validation(format!("t = {t_end} is not a grid point of the integrator"))
    })?;
    if end == 0 {
        return validation("t must be positive");
    }
    let g = if end + 1 == g.len() { g.clone() } else { g.truncate(end)? };
    let alpha = order.value();
    let e = -alpha - 1.0;
    let t = g.times();
    let x = g.values();
    let k_end = end;
    let tk = t[k_end];
    let g_end = match recon {
        Reconstruction::PiecewiseLinear => x[k_end],
        Reconstruction::PiecewiseConstantLeft => x[k_end - 1],
    };
    let norm = 1.0 / gamma(1.0 - alpha);
    let table = g.uniform_step().map(|h| UniformTable::new(e, h, 2, k_end));
    let mut out: Vec<f64> = (0..=k_end)
        .into_par_iter()
        .map(|i| {
            if i == k_end {
                return 0.0;
            }
            let s = t[i];
            let mut acc = 0.0;
            if recon == Reconstruction::PiecewiseLinear {
                let h = t[i + 1] - s;
                let slope = (x[i + 1] - x[i]) / h;
                acc -= slope * h.powf(1.0 - alpha) / (1.0 - alpha);
            }
            for k in (i + 1)..k_end {
                let mo = match &table {
                    Some(tab) => tab.at(k - i + 1),
                    None => moments(e, t[k] - s, t[k + 1] - s),
                };
                acc += match recon {
                    Reconstruction::PiecewiseLinear => {
                        (x[i] - x[k]) * mo.j0 - (x[k + 1] - x[k]) * mo.j1
                    }
                    Reconstruction::PiecewiseConstantLeft => (x[i] - x[k]) * mo.j0,
                };
            }
            -((x[i] - g_end) * (tk - s).powf(-alpha) + alpha * acc) * norm
        })
        .collect();
    out[k_end] = 0.0;
    let label = g.label().to_string();
    SampledPath::new(t.to_vec(), std::mem::take(&mut out), label)
        .map_err(|e| Error::Numeric(format!("frac_deriv_right: {e}")))
}

fn finish(f: &SampledPath, values: Vec<f64>, what: &str) -> Result<SampledPath> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("{what}: non-finite value at index {i}")));
    }
    SampledPath::new(f.times().to_vec(), values, f.label())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn order_validation() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        assert_eq!(FracOrder::new(0.3).unwrap().complement().value(), 0.7);
    }

    #[test]
    fn integral_of_constant_and_linear() {
        let b = FracOrder::new(0.5).unwrap();
        let one = SampledPath::from_fn(1.0, 1025, |_| 1.0).unwrap();
        let out = frac_integral_left(&one, b, Reconstruction::PiecewiseLinear).unwrap();
        assert_eq!(out.values()[0], 0.0);
        assert!(rel(out.last(), 2.0 / PI.sqrt()) < 1e-6);
        let lin = SampledPath::from_fn(1.0, 1025, |t| t).unwrap();
        let out = frac_integral_left(&lin, b, Reconstruction::PiecewiseLinear).unwrap();
        assert!(rel(out.last(), 4.0 / (3.0 * PI.sqrt())) < 1e-9);
    }

    #[test]
    fn derivative_of_constant_and_linear() {
        let b = FracOrder::new(0.5).unwrap();
        let c = SampledPath::from_fn(1.0, 1025, |_| 2.5).unwrap();
        let out = frac_deriv_left(&c, b, Reconstruction::PiecewiseLinear).unwrap();
        for (s, v) in out.times().iter().zip(out.values()).skip(1) {
            assert!(rel(*v, 2.5 * s.powf(-0.5) / gamma(0.5)) < 1e-12);
        }
        let lin = SampledPath::from_fn(1.0, 1025, |t| t).unwrap();
        let out = frac_deriv_left(&lin, b, Reconstruction::PiecewiseLinear).unwrap();
        assert!(rel(out.last(), 2.0 / PI.sqrt()) < 1e-10);
        assert_eq!(out.values()[0], out.values()[1]);
    }

    #[test]
    fn right_derivative_golden_values() {
        let half = FracOrder::new(0.5).unwrap();
        let g = SampledPath::from_fn(1.0, 1025, |s| s).unwrap();
        let out = frac_deriv_right(&g, half, 1.0, Reconstruction::PiecewiseLinear).unwrap();
        let mid = out.index_of(0.5).unwrap();
        assert!(rel(out.values()[mid], 0.797_884_560_802_865_4) < 1e-10);
        assert_eq!(out.last(), 0.0);
        let c = SampledPath::from_fn(1.0, 65, |_| -4.0).unwrap();
        let out = frac_deriv_right(&c, half, 1.0, Reconstruction::PiecewiseLinear).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn right_derivative_truncates_at_t() {
        let g = SampledPath::from_fn(2.0, 201, |s| s).unwrap();
        let a = FracOrder::new(0.3).unwrap();
        let out = frac_deriv_right(&g, a, 1.0, Reconstruction::PiecewiseLinear).unwrap();
        assert_eq!(out.len(), 101);
        let expect = |s: f64| (1.0 - s).powf(0.7) / gamma(1.7);
        for (s, v) in out.times().iter().zip(out.values()) {
            assert!((v - expect(*s)).abs() < 1e-11);
        }
        assert!(frac_deriv_right(&g, a, 1.005, Reconstruction::PiecewiseLinear).is_err());
    }

    #[test]
    fn nonuniform_grid_matches_closed_form() {
        let times: Vec<f64> = (0..=400).map(|i| (i as f64 / 400.0).powi(2)).collect();
        let values: Vec<f64> = times.iter().map(|t| t * t).collect();
        let f = SampledPath::new(times, values, "").unwrap();
        let b = FracOrder::new(0.4).unwrap();
        let out = frac_deriv_left(&f, b, Reconstruction::PiecewiseLinear).unwrap();
        let expect = 2.0 / gamma(2.6);
        assert!(rel(out.last(), expect) < 1e-4, "{} vs {expect}", out.last());
    }
}
