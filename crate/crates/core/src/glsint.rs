//! Generalized Lebesgue–Stieltjes integrals through fractional derivatives,
//! Riemann–Stieltjes sums along tagged partitions, and the integration by
//! parts residual.
//!
//! The gLS value `∫_0^t (D^β_{0+} f)(s) (D^{1-β}_{t-} g_{t-})(s) ds` is
//! evaluated cell by cell with a product rule: the power terms anchored at
//! the two ends of a cell are integrated exactly against quadratic
//! interpolants of the remaining smooth parts, which are known from the
//! grid values of the fractional derivatives plus one midpoint sum.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta as beta_fn;

use crate::convexbv::BVFunction;
use crate::error::{validation, Error, Result};
use crate::numeric::convolve_truncated;
use crate::fracops::{
    besov_norm_w2_with, frac_deriv_left, frac_deriv_right, left_expansion, right_expansion,
    FracOrder, PowerExpansion, Reconstruction, Side,
};
use crate::paths::{generate_components, holder_estimate, ProcessKind, ProcessSpec, SampledPath};
use crate::quad::gauss_legendre_unit;
use crate::variation::{TagRule, TaggedPartition};

/// Hölder estimates bounding the admissible order window `(1 - γ̂, α̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderWindow {
    /// Exponent of the path driving the integrand.
    pub integrand_alpha: f64,
    /// Exponent of the integrator.
    pub integrator_gamma: f64,
}

impl HolderWindow {
    pub fn lower(&self) -> f64 {
        1.0 - self.integrator_gamma
    }

    pub fn upper(&self) -> f64 {
        self.integrand_alpha
    }

    pub fn contains(&self, beta: f64) -> bool {
        beta > self.lower() && beta < self.upper()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlsConfig {
    /// Explicit order; when absent the midpoint of `window` is used.
    pub beta: Option<FracOrder>,
    pub integrand_recon: Reconstruction,
    pub integrator_recon: Reconstruction,
    pub window: Option<HolderWindow>,
}

impl GlsConfig {
    /// Smooth integrands: both sides piecewise linear.
    pub fn new(beta: FracOrder) -> Self {
        Self {
            beta: Some(beta),
            integrand_recon: Reconstruction::PiecewiseLinear,
            integrator_recon: Reconstruction::PiecewiseLinear,
            window: None,
        }
    }

    /// Integrands of the form `f'_-(X)`: left-continuous steps against a
    /// piecewise linear integrator.
    pub fn bv_image(beta: FracOrder) -> Self {
        Self { integrand_recon: Reconstruction::PiecewiseConstantLeft, ..Self::new(beta) }
    }

    /// Order chosen at the midpoint of the window given by the estimates.
    pub fn from_window(window: HolderWindow) -> Self {
        Self {
            beta: None,
            integrand_recon: Reconstruction::PiecewiseLinear,
            integrator_recon: Reconstruction::PiecewiseLinear,
            window: Some(window),
        }
    }

    pub fn with_window(self, window: HolderWindow) -> Self {
        Self { window: Some(window), ..self }
    }

    pub fn with_recon(self, integrand: Reconstruction, integrator: Reconstruction) -> Self {
        Self { integrand_recon: integrand, integrator_recon: integrator, ..self }
    }

    /// The order to use, checked against the window when one is present.
    pub fn resolve_beta(&self) -> Result<FracOrder> {
        match (self.beta, self.window) {
            (Some(b), None) => Ok(b),
            (Some(b), Some(w)) if w.contains(b.value()) => Ok(b),
            (Some(b), Some(w)) => Err(Error::Config(format!(
                "beta = {} outside the admissible window ({}, {})",
                b.value(),
                w.lower(),
                w.upper()
            ))),
            (None, Some(w)) if w.lower() < w.upper() => {
                FracOrder::new(0.5 * (w.lower() + w.upper())).map_err(|e| Error::Config(e.to_string()))
            }
            (None, Some(w)) => Err(Error::Config(format!(
                "empty admissible window ({}, {}): exponents sum to at most 1",
                w.lower(),
                w.upper()
            ))),
            (None, None) => Err(Error::Config("no beta and no Hölder window given".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub beta_used: f64,
    /// `sup_s |D^{1-β}_{t-} g_{t-}(s)| · ‖f‖_{2,β}`; `+∞` if the norm saturated.
    pub apriori_bound: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

/// `∫_0^t f dg` in the generalized Lebesgue–Stieltjes sense.
pub fn gls_integral(f: &SampledPath, g: &SampledPath, cfg: &GlsConfig, t: f64) -> Result<IntegralResult> {
    if !f.same_grid(g) {
        return validation("integrand and integrator must share the grid");
    }
    let beta = cfg.resolve_beta()?;
    let end = f
        .index_of(t)
        .filter(|&i| i > 0)
        .ok_or_else(|| Error::Validation(format!("t = {t} is not a positive grid point")))?;
    let f = if end + 1 == f.len() { f.clone() } else { f.truncate(end)? };
    let g = if end + 1 == g.len() { g.clone() } else { g.truncate(end)? };
    let t_end = f.horizon();
    let alpha = beta.complement();

    let d_grid = frac_deriv_left(&f, beta, cfg.integrand_recon)?;
    let r_grid = frac_deriv_right(&g, alpha, t_end, cfg.integrator_recon)?;
    let left = left_expansion(&f, beta, cfg.integrand_recon);
    let right = right_expansion(&g, alpha, t_end, cfg.integrator_recon)?;
    let value = product_quadrature(f.times(), d_grid.values(), r_grid.values(), &left, &right);
    if !value.is_finite() {
        return Err(Error::Numeric(format!("gLS integral is not finite ({value})")));
    }

    let sup_r = r_grid.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let norm = besov_norm_w2_with(&f, beta, cfg.integrand_recon);
    let apriori_bound = if norm.saturated { f64::INFINITY } else { sup_r * norm.value };
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("sup_right_derivative".to_string(), sup_r);
    diagnostics.insert("w2_norm_integrand".to_string(), norm.value);
    diagnostics.insert("w2_saturated".to_string(), f64::from(u8::from(norm.saturated)));
    diagnostics.insert("grid_points".to_string(), f.len() as f64);
    Ok(IntegralResult { value, beta_used: beta.value(), apriori_bound, diagnostics })
}

/// Sum of expansion terms anchored at `node`, at distance `x > 0` from it.
fn node_sum(exp: &PowerExpansion, node: usize, x: f64) -> f64 {
    exp.terms_at(node).iter().map(|term| term.coeff * x.powf(term.exponent)).sum()
}

/// Expansion values at every cell midpoint, excluding the terms anchored at
/// the cell's own endpoints (`j` for left, `j + 1` for right).
fn midpoint_far_sums(times: &[f64], exp: &PowerExpansion, step: Option<f64>) -> Vec<f64> {
    let cells = times.len() - 1;
    let left = exp.side == Side::Left;
    let mut exponents: Vec<f64> = Vec::new();
    for term in &exp.terms {
        if !exponents.contains(&term.exponent) {
            exponents.push(term.exponent);
        }
    }
    // Dense coefficient rows per exponent; right-sided rows are stored
    // reversed so both sides become the causal convolution
    // `mid[j] = Σ_{m>=1} row[j - m] (m + 1/2)^e h^e`.
    let mut rows = vec![vec![0.0; cells + 1]; exponents.len()];
    for term in &exp.terms {
        let e = exponents.iter().position(|&x| x == term.exponent).expect("collected");
        let slot = if left { term.node } else { cells - term.node };
        rows[e][slot] += term.coeff;
    }
    if let Some(h) = step {
        let mut out = vec![0.0; cells + 1];
        for (row, &e) in rows.iter().zip(&exponents) {
            let scale = h.powf(e);
            let kernel: Vec<f64> =
                (0..=cells).map(|m| if m == 0 { 0.0 } else { scale * (m as f64 + 0.5).powf(e) }).collect();
            for (o, v) in out.iter_mut().zip(convolve_truncated(row, &kernel)) {
                *o += v;
            }
        }
        return if left { out.truncate(cells); out } else { (0..cells).map(|j| out[cells - j - 1]).collect() };
    }
    (0..cells)
        .into_par_iter()
        .map(|j| {
            let mid = 0.5 * (times[j] + times[j + 1]);
            let nodes = if left { 0..j } else { j + 2..cells + 1 };
            nodes
                .map(|k| {
                    let slot = if left { k } else { cells - k };
                    let d = if left { mid - times[k] } else { times[k] - mid };
                    rows.iter().zip(&exponents).map(|(row, &e)| row[slot] * d.powf(e)).sum::<f64>()
                })
                .sum()
        })
        .collect()
}

/// Coefficients `(A0, A1, A2)` of the quadratic `A0 + A1 u + A2 u²` on
/// `u ∈ [0, 1]` through the values at `u = 0, 1/2, 1`.
fn quadratic(v0: f64, v1: f64, v2: f64) -> [f64; 3] {
    [v0, -3.0 * v0 + 4.0 * v1 - v2, 2.0 * v0 - 4.0 * v1 + 2.0 * v2]
}

fn poly_eval(a: &[f64; 3], u: f64) -> f64 {
    a[0] + u * (a[1] + u * a[2])
}

fn product_quadrature(
    times: &[f64],
    d_grid: &[f64],
    r_grid: &[f64],
    left: &PowerExpansion,
    right: &PowerExpansion,
) -> f64 {
    let cells = times.len() - 1;
    let probe = SampledPath::new(times.to_vec(), vec![0.0; times.len()], "").ok();
    let step = probe.as_ref().and_then(SampledPath::uniform_step);
    let d_mid = midpoint_far_sums(times, left, step);
    let r_mid = midpoint_far_sums(times, right, step);
    let (gx, gw) = gauss_legendre_unit(3);
    let mut beta_cache: Vec<((f64, f64), f64)> = Vec::new();
    let mut beta_of = |p: f64, q: f64| {
        if let Some(&(_, b)) = beta_cache.iter().find(|(k, _)| *k == (p, q)) {
            return b;
        }
        let b = beta_fn(p + 1.0, q + 1.0);
        beta_cache.push(((p, q), b));
        b
    };

    let mut total = 0.0;
    for j in 0..cells {
        let h = times[j + 1] - times[j];
        let near_d = left.terms_at(j);
        let near_r = right.terms_at(j + 1);
        let far_d0 = if j == 0 { 0.0 } else { d_grid[j] };
        let far_d2 = d_grid[j + 1] - node_sum(left, j, h);
        let far_r0 = r_grid[j] - node_sum(right, j + 1, h);
        let far_r2 = if j + 1 == cells { 0.0 } else { r_grid[j + 1] };
        let pd = quadratic(far_d0, d_mid[j], far_d2);
        let pr = quadratic(far_r0, r_mid[j], far_r2);

        let mut cell = 0.0;
        for a in near_d {
            let p = a.exponent;
            for b in near_r {
                cell += a.coeff * b.coeff * h.powf(p + b.exponent + 1.0) * beta_of(p, b.exponent);
            }
            let hp = h.powf(p + 1.0);
            cell += a.coeff * hp * (pr[0] / (p + 1.0) + pr[1] / (p + 2.0) + pr[2] / (p + 3.0));
        }
        for b in near_r {
            let q = b.exponent;
            let hq = h.powf(q + 1.0);
            let (q1, q2, q3) = (q + 1.0, q + 2.0, q + 3.0);
            cell += b.coeff * hq * (pd[0] / q1 + pd[1] / (q1 * q2) + 2.0 * pd[2] / (q1 * q2 * q3));
        }
        cell += h * gx.iter().zip(&gw).map(|(&u, w)| w * poly_eval(&pd, u) * poly_eval(&pr, u)).sum::<f64>();
        total += cell;
    }
    total
}

/// `Σ_i f(tag_i) (g(t_i) - g(t_{i-1}))` along the partition.
pub fn rs_sum(f: &SampledPath, g: &SampledPath, part: &TaggedPartition) -> Result<f64> {
    if !f.same_grid(g) {
        return validation("integrand and integrator must share the grid");
    }
    part.check_path(g)?;
    let (fv, gv) = (f.values(), g.values());
    Ok(part
        .points()
        .windows(2)
        .zip(part.tags())
        .map(|(w, &tag)| fv[tag] * (gv[w[1]] - gv[w[0]]))
        .sum())
}

/// `|∫ X dY + ∫ Y dX - (X_T Y_T - X_0 Y_0)|` with both integrals as forward
/// sums over the full grid.
pub fn integration_by_parts_residual(x: &SampledPath, y: &SampledPath) -> Result<f64> {
    let part = TaggedPartition::full(x.len(), TagRule::Forward)?;
    let xy = rs_sum(x, y, &part)?;
    let yx = rs_sum(y, x, &part)?;
    let boundary = x.last() * y.last() - x.first() * y.first();
    Ok((xy + yx - boundary).abs())
}

/// The integrand series `f(X¹_t, …, Xᵏ_t)` on the shared grid.
pub fn compose_paths(f: impl Fn(&[f64]) -> f64, paths: &[SampledPath]) -> Result<SampledPath> {
    let first = paths.first().ok_or_else(|| Error::Validation("need at least one path".into()))?;
    if paths.iter().any(|p| !p.same_grid(first)) {
        return validation("all paths must share the grid");
    }
    let mut point = vec![0.0; paths.len()];
    let values = (0..first.len())
        .map(|i| {
            for (slot, p) in point.iter_mut().zip(paths) {
                *slot = p.values()[i];
            }
            f(&point)
        })
        .collect();
    SampledPath::new(first.times().to_vec(), values, "composed")
}

/// `Σ_i f(X¹(tag_i), …, Xᵏ(tag_i)) (g(t_i) - g(t_{i-1}))`.
pub fn multidim_rs_sum(
    f: impl Fn(&[f64]) -> f64,
    paths: &[SampledPath],
    g: &SampledPath,
    part: &TaggedPartition,
) -> Result<f64> {
    rs_sum(&compose_paths(f, paths)?, g, part)
}

/// Least-squares slope `α₂` of `log P(J_{s+Δ} ≠ J_s)` against `log Δ` over
/// lags of 1 to `max_lag` grid steps; `None` when fewer than two lags see a
/// change.
pub fn jump_decay_exponent(jumps: &SampledPath, max_lag: usize) -> Option<f64> {
    let v = jumps.values();
    let h = jumps.uniform_step()?;
    let points: Vec<(f64, f64)> = (1..=max_lag.min(v.len().saturating_sub(1)))
        .filter_map(|lag| {
            let cells = v.len() - lag;
            let changed = (0..cells).filter(|&i| v[i + lag] != v[i]).count();
            (changed > 0).then(|| ((lag as f64 * h).ln(), (changed as f64 / cells as f64).ln()))
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Lags used by the jump-decay fit in [`mixed_integral`].
pub const JUMP_DECAY_MAX_LAG: usize = 64;

/// `∫_0^T f(Y) dX` for a mixed process `Y` whose first component is the
/// Hölder path `X`.
///
/// Diagnostics carry the Hölder estimate of `X`, the fitted jump-decay
/// exponent of the compound Poisson part, and `jump_decay_warning = 1` when
/// that exponent does not exceed `1 - α̂`.
pub fn mixed_integral(f: &BVFunction, spec: &ProcessSpec, cfg: &GlsConfig) -> Result<IntegralResult> {
    let ProcessKind::Mixed { components } = &spec.kind else {
        return validation("mixed_integral needs a mixed process spec");
    };
    let parts = generate_components(spec)?;
    let is_jump: Vec<bool> = components.iter().map(ProcessKind::is_compound_poisson).collect();
    mixed_integral_from_parts(f, &parts, &is_jump, cfg)
}

/// [`mixed_integral`] on already simulated components; `is_jump` marks the
/// compound Poisson ones.
pub fn mixed_integral_from_parts(
    f: &BVFunction,
    parts: &[SampledPath],
    is_jump: &[bool],
    cfg: &GlsConfig,
) -> Result<IntegralResult> {
    if parts.is_empty() || parts.len() != is_jump.len() {
        return validation("need one jump flag per mixed component");
    }
    let x = &parts[0];
    let alpha_hat = holder_estimate(x)?.alpha;
    if alpha_hat <= 0.5 {
        return Err(Error::Regime(format!(
            "first mixed component has Hölder estimate {alpha_hat:.3} <= 1/2"
        )));
    }
    let mut y = x.clone();
    for p in &parts[1..] {
        y = y.add(p)?;
    }
    let z = y.map(|v| f.evaluate(v))?;
    let cfg = if cfg.beta.is_none() && cfg.window.is_none() {
        cfg.with_window(HolderWindow { integrand_alpha: alpha_hat, integrator_gamma: alpha_hat })
    } else {
        *cfg
    };
    let mut result = gls_integral(&z, x, &cfg, x.horizon())?;
    result.diagnostics.insert("holder_alpha".into(), alpha_hat);

    let mut jumps: Option<SampledPath> = None;
    for (p, _) in parts.iter().zip(is_jump).filter(|(_, &j)| j) {
        jumps = Some(match jumps {
            None => p.clone(),
            Some(acc) => acc.add(p)?,
        });
    }
    if let Some(jumps) = jumps {
        let fitted = jump_decay_exponent(&jumps, JUMP_DECAY_MAX_LAG);
        let warn = fitted.is_none_or(|a2| a2 <= 1.0 - alpha_hat);
        result.diagnostics.insert("jump_decay_alpha2".into(), fitted.unwrap_or(f64::NAN));
        result.diagnostics.insert("jump_decay_warning".into(), f64::from(u8::from(warn)));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(b: f64) -> FracOrder {
        FracOrder::new(b).unwrap()
    }

    #[test]
    fn window_resolution() {
        let w = HolderWindow { integrand_alpha: 0.75, integrator_gamma: 0.75 };
        assert_eq!(GlsConfig::from_window(w).resolve_beta().unwrap().value(), 0.5);
        assert!(matches!(GlsConfig::new(order(0.8)).with_window(w).resolve_beta(), Err(Error::Config(_))));
        assert!(matches!(GlsConfig::new(order(0.2)).with_window(w).resolve_beta(), Err(Error::Config(_))));
        let empty = HolderWindow { integrand_alpha: 0.4, integrator_gamma: 0.5 };
        assert!(GlsConfig::from_window(empty).resolve_beta().is_err());
    }

    #[test]
    fn constant_integrand_telescopes() {
        let n = 4097;
        let f = SampledPath::from_fn(1.0, n, |_| 1.0).unwrap();
        let g = SampledPath::from_fn(1.0, n, |s| (2.0 * s).sin() + s * s).unwrap();
        let exact = g.last() - g.first();
        for b in [0.3, 0.5, 0.7] {
            let r = gls_integral(&f, &g, &GlsConfig::new(order(b)), 1.0).unwrap();
            assert!((r.value - exact).abs() <= 1e-3 * exact.abs(), "b={b}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn smooth_pair_matches_closed_form() {
        let n = 4097;
        let f = SampledPath::from_fn(1.0, n, |s| s).unwrap();
        let g = SampledPath::from_fn(1.0, n, |s| s * s).unwrap();
        for b in [0.3, 0.5, 0.7] {
            let r = gls_integral(&f, &g, &GlsConfig::new(order(b)), 1.0).unwrap();
            assert!((r.value - 2.0 / 3.0).abs() <= 1e-3 * 2.0 / 3.0, "b={b}: {}", r.value);
            assert!(r.value.abs() <= r.apriori_bound);
        }
    }

    /// For piecewise linear reconstructions the gLS integral equals the
    /// trapezoid sum `Σ (f_j + f_{j+1})/2 Δg_j`; for a left-continuous step
    /// integrand it equals the forward sum.
    #[test]
    fn reconstructed_integral_on_rough_data() {
        let n = 513;
        let f = SampledPath::from_fn(1.0, n, |s| (40.0 * s).sin() + ((s * 1e4) as i64 % 7) as f64 * 0.1).unwrap();
        let g = SampledPath::from_fn(1.0, n, |s| (13.0 * s).cos() + ((s * 3e3) as i64 % 5) as f64 * 0.05).unwrap();
        let (fv, gv) = (f.values(), g.values());
        let trap: f64 = (0..n - 1).map(|j| 0.5 * (fv[j] + fv[j + 1]) * (gv[j + 1] - gv[j])).sum();
        let fwd: f64 = (0..n - 1).map(|j| fv[j] * (gv[j + 1] - gv[j])).sum();
        for b in [0.3, 0.5, 0.7] {
            let lin = gls_integral(&f, &g, &GlsConfig::new(order(b)), 1.0).unwrap().value;
            assert!((lin - trap).abs() < 2e-3 * (1.0 + trap.abs()), "b={b}: {lin} vs {trap}");
            let step = gls_integral(&f, &g, &GlsConfig::bv_image(order(b)), 1.0).unwrap().value;
            assert!((step - fwd).abs() < 2e-3 * (1.0 + fwd.abs()), "b={b}: {step} vs {fwd}");
        }
    }

    #[test]
    fn nonuniform_grid_uses_direct_midpoint_sums() {
        let n = 400;
        let times: Vec<f64> = (0..n).map(|i| (i as f64 / (n - 1) as f64).powf(1.4)).collect();
        let f = SampledPath::new(times.clone(), times.iter().map(|s| (9.0 * s).sin()).collect(), "").unwrap();
        let g = SampledPath::new(times.clone(), times.iter().map(|s| s.exp()).collect(), "").unwrap();
        let (fv, gv) = (f.values(), g.values());
        let trap: f64 = (0..n - 1).map(|j| 0.5 * (fv[j] + fv[j + 1]) * (gv[j + 1] - gv[j])).sum();
        let r = gls_integral(&f, &g, &GlsConfig::new(order(0.4)), 1.0).unwrap();
        assert!((r.value - trap).abs() < 1e-3 * (1.0 + trap.abs()), "{} vs {trap}", r.value);
    }

    #[test]
    fn integration_to_interior_point() {
        let n = 1025;
        let f = SampledPath::from_fn(1.0, n, |s| s).unwrap();
        let g = SampledPath::from_fn(1.0, n, |s| s * s).unwrap();
        let r = gls_integral(&f, &g, &GlsConfig::new(order(0.5)), 0.5).unwrap();
        // ∫_0^{1/2} 2 s² ds = 1/12.
        assert!((r.value - 1.0 / 12.0).abs() < 1e-4, "{}", r.value);
        assert!(gls_integral(&f, &g, &GlsConfig::new(order(0.5)), 0.3333).is_err());
    }

    #[test]
    fn rs_sum_basics() {
        let n = 1025;
        let g = SampledPath::from_fn(1.0, n, |s| s * s).unwrap();
        let c = SampledPath::from_fn(1.0, n, |_| 3.0).unwrap();
        let part = TaggedPartition::full(n, TagRule::Forward).unwrap();
        assert_eq!(rs_sum(&c, &g, &part).unwrap(), 3.0 * (g.last() - g.first()));
        let f = SampledPath::from_fn(1.0, n, |s| s).unwrap();
        assert!((rs_sum(&f, &g, &part).unwrap() - 2.0 / 3.0).abs() < 2e-3);
        let one_d = multidim_rs_sum(|x| x[0], std::slice::from_ref(&f), &g, &part).unwrap();
        assert_eq!(one_d, rs_sum(&f, &g, &part).unwrap());
    }

    #[test]
    fn integration_by_parts() {
        let n = 4097;
        let one = SampledPath::from_fn(1.0, n, |_| 1.0).unwrap();
        let y = SampledPath::from_fn(1.0, n, |s| s * s).unwrap();
        assert_eq!(integration_by_parts_residual(&one, &y).unwrap(), 0.0);
        let x = SampledPath::from_fn(1.0, n, |s| s).unwrap();
        assert!(integration_by_parts_residual(&x, &y).unwrap() <= 1e-3);
    }

    #[test]
    fn jump_decay_of_poisson_is_linear() {
        let spec = ProcessSpec::new(
            ProcessKind::CompoundPoisson {
                rate: 5.0,
                jump_dist: crate::paths::JumpDistribution::Constant { size: 1.0 },
            },
            1.0,
            16385,
            11,
        );
        let j = crate::paths::generate(&spec).unwrap();
        let a2 = jump_decay_exponent(&j, JUMP_DECAY_MAX_LAG).unwrap();
        assert!((a2 - 1.0).abs() < 0.1, "{a2}");
    }
}
