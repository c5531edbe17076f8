use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;

/// Number of grid points at which the lower bound `V(t) >= c t^{2b}` is checked.
const LOWER_BOUND_CHECKS: usize = 1024;

/// Variance function of a centered Gaussian process together with a claimed
/// lower bound `V(t) >= lower_constant * t^(2 * lower_exponent)`.
#[derive(Clone)]
pub struct VarianceFunction {
    variance: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub lower_exponent: f64,
    pub lower_constant: f64,
}

impl fmt::Debug for VarianceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VarianceFunction")
            .field("lower_exponent", &self.lower_exponent)
            .field("lower_constant", &self.lower_constant)
            .finish_non_exhaustive()
    }
}

impl VarianceFunction {
    pub fn new(
        variance: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lower_exponent: f64,
        lower_constant: f64,
    ) -> Result<Self> {
        if !(lower_constant > 0.0) || !lower_constant.is_finite() {
            return Err(Error::Validation(format!(
                "lower constant must be positive, got {lower_constant}"
            )));
        }
        if !lower_exponent.is_finite() {
            return Err(Error::Validation("lower exponent must be finite".into()));
        }
        Ok(Self { variance: Arc::new(variance), lower_exponent, lower_constant })
    }

    /// `V(t) = t^{2H}`, the variance of fractional Brownian motion.
    pub fn fbm(hurst: f64) -> Result<Self> {
        Self::new(move |t: f64| t.powf(2.0 * hurst), hurst, 1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.variance)(t)
    }
}

/// Returns `∫_0^T (2π V(t))^{-1/2} dt`, the L¹ bound on the one-dimensional
/// densities of a centered Gaussian process with variance `V`.
///
/// The substitution `t = T u^{1/(1-b)}` with `b = max(lower_exponent, 0)`
/// removes the `t^{-b}` endpoint singularity before adaptive quadrature.
pub fn check_density_assumption(vf: &VarianceFunction, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Validation(format!("horizon must be positive, got {horizon}")));
    }
    let b = vf.lower_exponent;
    if b >= 1.0 {
        return Err(Error::AssumptionViolated(format!(
            "lower exponent {b} >= 1: (2πV)^(-1/2) is not integrable at 0"
        )));
    }
    for i in 1..=LOWER_BOUND_CHECKS {
        let t = horizon * i as f64 / LOWER_BOUND_CHECKS as f64;
        let v = vf.eval(t);
        let bound = vf.lower_constant * t.powf(2.0 * b);
        if !v.is_finite() || v < bound * (1.0 - 1e-12) {
            return Err(Error::AssumptionViolated(format!(
                "V({t}) = {v} is below the claimed bound {bound}"
            )));
        }
    }
    let power = 1.0 / (1.0 - b.max(0.0));
    let integrand = |u: f64| {
        let t = horizon * u.powf(power);
        let jac = horizon * power * u.powf(power - 1.0);
        jac / (2.0 * std::f64::consts::PI * vf.eval(t)).sqrt()
    };
    integrate_adaptive(integrand, 0.0, 1.0, 1e-13, 1e-11)
}
