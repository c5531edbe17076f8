//! Verification experiments for the change-of-variable formulas on
//! simulated paths, with machine-readable reports.
//!
//! Every experiment simulates one path per seed on the finest dyadic grid
//! and subsamples it for the coarser grids, so a row series for one seed
//! follows a single trajectory under refinement.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexbv::{mollify, BVFunction, Mollifier};
use crate::error::{validation, Error, Result};
use crate::fracops::{besov_norm_w2_with, FracOrder, Reconstruction};
use crate::glsint::{gls_integral, rs_sum, GlsConfig};
use crate::numeric::pow_abs;
use crate::paths::{generate, generate_components, holder_estimate, ProcessKind, ProcessSpec, SampledPath};
use crate::variation::{TagRule, TaggedPartition};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// No tolerance declared; the rows are informational.
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Which quantity the row holds; verdicts only read `"residual"` rows.
    pub series: String,
    /// Grid points, mollifier scale or bandwidth, depending on the series.
    pub scale: f64,
    pub seed: u64,
    pub value: f64,
}

impl ReportRow {
    fn residual(scale: usize, seed: u64, value: f64) -> Self {
        Self { series: RESIDUAL.into(), scale: scale as f64, seed, value }
    }
}

const RESIDUAL: &str = "residual";

/// Pass iff the 95th percentile of the residuals on the finest scale is at
/// most `threshold`, and, when `max_trend` is set, the Spearman correlation
/// between scale and per-scale mean residual is at most `max_trend`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub threshold: f64,
    pub max_trend: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub name: String,
    pub parameters: serde_json::Value,
    pub rows: Vec<ReportRow>,
    pub tolerance: Option<Tolerance>,
    pub summary: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

impl ExperimentReport {
    /// Builds the report; the verdict and the residual summary statistics
    /// are computed from `rows` and `tolerance` alone.
    pub fn new(
        name: impl Into<String>,
        parameters: serde_json::Value,
        rows: Vec<ReportRow>,
        tolerance: Option<Tolerance>,
        mut summary: BTreeMap<String, f64>,
    ) -> Self {
        let verdict = judge(&rows, tolerance.as_ref());
        if let Some(p95) = finest_p95(&rows) {
            summary.insert("finest_p95".into(), p95);
        }
        if let Some(rho) = residual_trend(&rows) {
            summary.insert("spearman_trend".into(), rho);
        }
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            name: name.into(),
            parameters,
            rows,
            tolerance,
            summary,
            verdict,
        }
    }

    pub fn series(&self, name: &str) -> impl Iterator<Item = &ReportRow> {
        let name = name.to_string();
        self.rows.iter().filter(move |r| r.series == name)
    }

    /// Residual values on the finest scale.
    pub fn finest_residuals(&self) -> Vec<f64> {
        finest(&self.rows)
    }

    /// `(scale, mean value)` per scale of a series, sorted by scale.
    pub fn scale_means(&self, series: &str) -> Vec<(f64, f64)> {
        scale_means(self.rows.iter().filter(|r| r.series == series))
    }
}

fn residuals(rows: &[ReportRow]) -> impl Iterator<Item = &ReportRow> {
    rows.iter().filter(|r| r.series == RESIDUAL)
}

fn finest(rows: &[ReportRow]) -> Vec<f64> {
    let Some(top) = residuals(rows).map(|r| r.scale).reduce(f64::max) else {
        return Vec::new();
    };
    residuals(rows).filter(|r| r.scale == top).map(|r| r.value).collect()
}

fn finest_p95(rows: &[ReportRow]) -> Option<f64> {
    let v = finest(rows);
    (!v.is_empty()).then(|| percentile(&v, 95.0))
}

fn scale_means<'a>(rows: impl Iterator<Item = &'a ReportRow>) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.scale.to_bits()).or_insert((r.scale, 0.0, 0));
        e.1 += r.value;
        e.2 += 1;
    }
    let mut out: Vec<(f64, f64)> = acc.into_values().map(|(s, sum, k)| (s, sum / k as f64)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn residual_trend(rows: &[ReportRow]) -> Option<f64> {
    let means = scale_means(residuals(rows));
    (means.len() >= 2).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = means.into_iter().unzip();
        spearman(&x, &y)
    })
}

fn judge(rows: &[ReportRow], tolerance: Option<&Tolerance>) -> Verdict {
    let Some(tol) = tolerance else {
        return Verdict::Diagnostic;
    };
    let within = finest_p95(rows).is_some_and(|p| p <= tol.threshold);
    let trend_ok = match tol.max_trend {
        None => true,
        Some(max) => residual_trend(rows).is_some_and(|rho| rho <= max),
    };
    if within && trend_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (pct / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // Tied values share the average rank.
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson correlation of average ranks); 0 when
/// either sample is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Grid levels and seeds shared by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Grids have `2^level + 1` points for `level` in `min_level..=max_level`.
    pub min_level: u32,
    pub max_level: u32,
    pub seeds: Vec<u64>,
    /// Reject driving paths whose Hölder estimate is at most 1/2.
    pub require_zero_qv: bool,
    pub tolerance: Option<ToleranceRule>,
}

impl ExperimentOptions {
    pub fn new(min_level: u32, max_level: u32, seeds: Vec<u64>) -> Self {
        Self { min_level, max_level, seeds, require_zero_qv: true, tolerance: None }
    }

    pub fn with_tolerance(self, rule: ToleranceRule) -> Self {
        Self { tolerance: Some(rule), ..self }
    }

    pub fn allow_nonzero_qv(self) -> Self {
        Self { require_zero_qv: false, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.min_level > self.max_level || self.max_level > 24 || self.min_level == 0 {
            return validation(format!("bad level range {}..={}", self.min_level, self.max_level));
        }
        if self.seeds.is_empty() {
            return validation("need at least one seed");
        }
        Ok(())
    }

    fn levels(&self) -> impl Iterator<Item = u32> {
        self.min_level..=self.max_level
    }

    fn finest_points(&self) -> usize {
        (1usize << self.max_level) + 1
    }

    fn stride(&self, level: u32) -> usize {
        1usize << (self.max_level - level)
    }
}

/// Threshold `absolute + relative · q95(|X_T|)`, resolved once the terminal
/// values of all seeds are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRule {
    pub absolute: f64,
    pub relative_to_terminal: f64,
    pub max_trend: Option<f64>,
}

impl ToleranceRule {
    pub fn absolute(threshold: f64) -> Self {
        Self { absolute: threshold, relative_to_terminal: 0.0, max_trend: None }
    }

    pub fn with_trend(self, max_trend: f64) -> Self {
        Self { max_trend: Some(max_trend), ..self }
    }

    fn resolve(&self, terminal_q95: f64) -> Tolerance {
        Tolerance {
            threshold: self.absolute + self.relative_to_terminal * terminal_q95,
            max_trend: self.max_trend,
        }
    }
}

/// Driving path of one seed on the finest grid.
fn simulate(spec: &ProcessSpec, opts: &ExperimentOptions, seed: u64) -> Result<SampledPath> {
    generate(&spec.with_seed(seed).with_grid_size(opts.finest_points()))
}

fn check_regime(path: &SampledPath, required: bool) -> Result<f64> {
    let alpha = holder_estimate(path)?.alpha;
    if required && alpha <= 0.5 {
        return Err(Error::Regime(format!(
            "Hölder estimate {alpha:.3} <= 1/2: quadratic variation does not vanish"
        )));
    }
    Ok(alpha)
}

struct SeedOutcome {
    rows: Vec<ReportRow>,
    terminal: f64,
    alpha: f64,
}

fn finish(
    name: &str,
    parameters: serde_json::Value,
    opts: &ExperimentOptions,
    outcomes: Vec<SeedOutcome>,
    mut summary: BTreeMap<String, f64>,
) -> ExperimentReport {
    let terminals: Vec<f64> = outcomes.iter().map(|o| o.terminal.abs()).collect();
    let q95 = percentile(&terminals, 95.0);
    summary.insert("terminal_abs_p95".into(), q95);
    let alphas: Vec<f64> = outcomes.iter().map(|o| o.alpha).collect();
    summary.insert("holder_alpha_mean".into(), alphas.iter().sum::<f64>() / alphas.len() as f64);
    let rows = outcomes.into_iter().flat_map(|o| o.rows).collect();
    let tolerance = opts.tolerance.map(|r| r.resolve(q95));
    ExperimentReport::new(name, parameters, rows, tolerance, summary)
}

fn forward_integral(integrand: &SampledPath, driver: &SampledPath) -> Result<f64> {
    rs_sum(integrand, driver, &TaggedPartition::full(driver.len(), TagRule::Forward)?)
}

/// Residual `|f(X_T) - f(X_0) - ∫ f'(X) dX|` with forward sums, per grid and
/// seed. Rows of series `"gls_gap"` compare the gLS integral with the sum
/// that integrates the same reconstruction exactly (forward sums for steps,
/// the forward/backward average for linear interpolation), relative to
/// `1 + |sum|`, on grids of at most `2^12 + 1` points.
pub fn ito_smooth_residual(
    f: impl Fn(f64) -> f64 + Sync,
    fprime: impl Fn(f64) -> f64 + Sync,
    spec: &ProcessSpec,
    cfg: &GlsConfig,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    opts.validate()?;
    let outcomes = opts
        .seeds
        .par_iter()
        .map(|&seed| {
            let fine = simulate(spec, opts, seed)?;
            let alpha = check_regime(&fine, opts.require_zero_qv)?;
            let mut rows = Vec::new();
            for level in opts.levels() {
                let x = fine.subsample(opts.stride(level))?;
                let z = x.map(&fprime)?;
                let rs = forward_integral(&z, &x)?;
                let residual = (f(x.last()) - f(x.first()) - rs).abs();
                rows.push(ReportRow::residual(x.len(), seed, residual));
                if opts.require_zero_qv && level <= 12 {
                    let gls = gls_integral(&z, &x, cfg, x.horizon())?.value;
                    let matched = match cfg.integrand_recon {
                        Reconstruction::PiecewiseConstantLeft => rs,
                        Reconstruction::PiecewiseLinear => {
                            0.5 * (rs + rs_sum(&z, &x, &TaggedPartition::full(x.len(), TagRule::Backward)?)?)
                        }
                    };
                    let gap = (gls - matched).abs() / (1.0 + matched.abs());
                    rows.push(ReportRow { series: "gls_gap".into(), scale: x.len() as f64, seed, value: gap });
                }
            }
            Ok(SeedOutcome { rows, terminal: fine.last(), alpha })
        })
        .collect::<Result<Vec<_>>>()?;
    let params = serde_json::json!({ "spec": spec, "config": cfg, "options": opts });
    Ok(finish("ito_smooth", params, opts, outcomes, BTreeMap::new()))
}

/// Residual `|f(X_T) - f(X_0) - ∫ f'_-(X) dX|` with the gLS integral, where
/// `f = ∫_0^x f'_-`. Rows of series `"mollified_gap"` hold
/// `|∫ f'_n(X) dX - ∫ f'_-(X) dX|` on the finest grid of the first seed.
pub fn ito_convex_residual(
    fprime: &BVFunction,
    spec: &ProcessSpec,
    cfg: &GlsConfig,
    mollifier_scales: &[u32],
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    opts.validate()?;
    let [lo, hi] = fprime.support();
    if !lo.is_finite() || !hi.is_finite() {
        return validation("f'_- must be truncated to a compact support first");
    }
    let outcomes = opts
        .seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let fine = simulate(spec, opts, seed)?;
            let alpha = check_regime(&fine, opts.require_zero_qv)?;
            let mut rows = Vec::new();
            for level in opts.levels() {
                let x = fine.subsample(opts.stride(level))?;
                let z = x.map(|v| fprime.evaluate(v))?;
                let integral = gls_integral(&z, &x, cfg, x.horizon())?.value;
                let lhs = fprime.antiderivative(x.last()) - fprime.antiderivative(x.first());
                rows.push(ReportRow::residual(x.len(), seed, (lhs - integral).abs()));
            }
            if i == 0 {
                let z = fine.map(|v| fprime.evaluate(v))?;
                let base = gls_integral(&z, &fine, cfg, fine.horizon())?.value;
                for &n in mollifier_scales {
                    let m = mollify(fprime, Mollifier::new(n)?)?;
                    let zn = fine.map(|v| m.first_derivative(v))?;
                    let smoothed = gls_integral(&zn, &fine, cfg, fine.horizon())?.value;
                    rows.push(ReportRow {
                        series: "mollified_gap".into(),
                        scale: n as f64,
                        seed,
                        value: (smoothed - base).abs(),
                    });
                }
            }
            Ok(SeedOutcome { rows, terminal: fine.last(), alpha })
        })
        .collect::<Result<Vec<_>>>()?;
    let params = serde_json::json!({
        "spec": spec, "config": cfg, "options": opts,
        "fprime": fprime, "mollifier_scales": mollifier_scales,
    });
    Ok(finish("ito_convex", params, opts, outcomes, BTreeMap::new()))
}

/// Kernel estimate of the occupation density of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeEstimate {
    pub levels: Vec<f64>,
    /// Nonnegative, one per level.
    pub values: Vec<f64>,
    pub eps: f64,
}

impl LocalTimeEstimate {
    /// `Σ_a L̂_a Δa` with trapezoid weights over the level grid.
    pub fn occupation_mass(&self) -> f64 {
        self.levels
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(a, v)| 0.5 * (v[0] + v[1]) * (a[1] - a[0]))
            .sum()
    }

    /// `∫ L̂_a μ(da)` for a signed measure given as its positive and negative
    /// parts, with `L̂` linearly interpolated between levels and 0 outside.
    pub fn integrate_against(&self, f: &BVFunction) -> f64 {
        let lt = |a: f64| self.interpolate(a);
        f.positive.measure.integrate(lt) - f.negative.measure.integrate(lt)
    }

    pub fn interpolate(&self, a: f64) -> f64 {
        let l = &self.levels;
        if l.is_empty() || a < l[0] || a > l[l.len() - 1] {
            return 0.0;
        }
        let i = l.partition_point(|&x| x <= a);
        if i == l.len() {
            return self.values[l.len() - 1];
        }
        let w = (a - l[i - 1]) / (l[i] - l[i - 1]);
        self.values[i - 1] + w * (self.values[i] - self.values[i - 1])
    }
}

/// `d⟨Y⟩ = dt` per cell, for `Y` = Hölder path plus Brownian motion.
pub fn time_qv_density(path: &SampledPath) -> Vec<f64> {
    path.times().windows(2).map(|w| w[1] - w[0]).collect()
}

/// Realized squared increments per cell.
pub fn realized_qv_density(path: &SampledPath) -> Vec<f64> {
    path.values().windows(2).map(|w| pow_abs(w[1] - w[0], 2.0)).collect()
}

/// Default bandwidth: one fiftieth of the path range.
pub fn default_bandwidth(path: &SampledPath) -> f64 {
    let (lo, hi) = value_range(path);
    (hi - lo) / 50.0
}

fn value_range(path: &SampledPath) -> (f64, f64) {
    path.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Uniform levels covering `[min Y - eps, max Y + eps]`.
pub fn level_grid(path: &SampledPath, eps: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = value_range(path);
    let (a, b) = (lo - eps, hi + eps);
    let count = count.max(2);
    (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect()
}

/// `L̂_a = (1/eps) Σ_{cells i with |Y_{t_i} - a| < eps/2} qv_i`.
pub fn local_time(path: &SampledPath, qv_density: &[f64], levels: &[f64], eps: f64) -> Result<LocalTimeEstimate> {
    if !(eps > 0.0) || !eps.is_finite() {
        return validation(format!("bandwidth must be positive, got {eps}"));
    }
    if qv_density.len() + 1 != path.len() {
        return validation("need one quadratic-variation increment per grid cell");
    }
    if qv_density.iter().any(|q| !(*q >= 0.0)) {
        return validation("quadratic-variation increments must be nonnegative");
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return validation("levels must be strictly increasing");
    }
    let y = &path.values()[..path.len() - 1];
    // Sorting the cell values lets each level sum a contiguous window.
    let mut cells: Vec<(f64, f64)> = y.iter().copied().zip(qv_density.iter().copied()).collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix = Vec::with_capacity(cells.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for c in &cells {
        acc += c.1;
        prefix.push(acc);
    }
    let values = levels
        .iter()
        .map(|&a| {
            let lo = cells.partition_point(|c| c.0 <= a - 0.5 * eps);
            let hi = cells.partition_point(|c| c.0 < a + 0.5 * eps);
            if hi <= lo {
                0.0
            } else {
                ((prefix[hi] - prefix[lo]) / eps).max(0.0)
            }
        })
        .collect();
    Ok(LocalTimeEstimate { levels: levels.to_vec(), values, eps })
}

fn local_time_term(y: &SampledPath, fprime: &BVFunction, eps: f64) -> Result<f64> {
    let levels = level_grid(y, eps, 2048);
    let lt = local_time(y, &time_qv_density(y), &levels, eps)?;
    Ok(0.5 * lt.integrate_against(fprime))
}

/// Residual `|f(Y_T) - f(Y_0) - ∫ f'_-(Y) dY - ½ ∫ L̂_a μ(da)|` where `μ` is
/// the second-derivative measure of `f` carried by `fprime`, the stochastic
/// integral is a forward sum and `L̂` uses `d⟨Y⟩ = dt` with the default
/// bandwidth. Rows of series `"eps_half"` and `"eps_double"` repeat the
/// residual on the finest grid with bandwidth `eps/2` and `2 eps`.
pub fn ito_tanaka_residual(
    fprime: &BVFunction,
    spec: &ProcessSpec,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    opts.validate()?;
    let has_brownian = match &spec.kind {
        ProcessKind::Brownian => true,
        ProcessKind::Mixed { components } => components.iter().any(|c| matches!(c, ProcessKind::Brownian)),
        _ => false,
    };
    if !has_brownian {
        return validation("Itô–Tanaka experiment needs a Brownian component");
    }
    let outcomes = opts
        .seeds
        .par_iter()
        .map(|&seed| {
            let fine_spec = spec.with_seed(seed).with_grid_size(opts.finest_points());
            let parts = generate_components(&fine_spec)?;
            let alpha = match &spec.kind {
                ProcessKind::Mixed { .. } if parts.len() > 1 => check_regime(&parts[0], opts.require_zero_qv)?,
                _ => 0.5,
            };
            let mut fine = parts[0].clone();
            for p in &parts[1..] {
                fine = fine.add(p)?;
            }
            let mut rows = Vec::new();
            let residual_at = |y: &SampledPath, eps: f64| -> Result<f64> {
                let z = y.map(|v| fprime.evaluate(v))?;
                let integral = forward_integral(&z, y)?;
                let lhs = fprime.antiderivative(y.last()) - fprime.antiderivative(y.first());
                Ok((lhs - integral - local_time_term(y, fprime, eps)?).abs())
            };
            for level in opts.levels() {
                let y = fine.subsample(opts.stride(level))?;
                let eps = default_bandwidth(&y);
                rows.push(ReportRow::residual(y.len(), seed, residual_at(&y, eps)?));
            }
            let eps = default_bandwidth(&fine);
            for (series, factor) in [("eps_half", 0.5), ("eps_double", 2.0)] {
                rows.push(ReportRow {
                    series: series.into(),
                    scale: fine.len() as f64,
                    seed,
                    value: residual_at(&fine, factor * eps)?,
                });
            }
            Ok(SeedOutcome { rows, terminal: fine.last(), alpha })
        })
        .collect::<Result<Vec<_>>>()?;
    let params = serde_json::json!({ "spec": spec, "options": opts, "fprime": fprime });
    Ok(finish("ito_tanaka", params, opts, outcomes, BTreeMap::new()))
}

/// Exponents of the moment diagnostic `E ∫ |X_t - a|^{-α} dt`.
pub const MOMENT_EXPONENTS: [f64; 3] = [0.3, 0.6, 0.9];
/// Level `a` of the moment diagnostic.
pub const MOMENT_LEVEL: f64 = 0.25;

/// `∫_0^T |X_t - a|^{-α} dt` by a left Riemann sum.
pub fn inverse_moment_integral(path: &SampledPath, a: f64, alpha: f64) -> f64 {
    let (t, x) = (path.times(), path.values());
    (0..path.len() - 1).map(|i| (t[i + 1] - t[i]) * pow_abs(x[i] - a, -alpha)).sum()
}

/// `‖f'_-(X)‖_{2,β}` across grids and seeds.
///
/// With `β` below the mean Hölder estimate the verdict passes when every
/// norm is finite and each refinement changes a seed's norm by a factor in
/// `[1/2, 2]`; otherwise the report is diagnostic. The summary carries the
/// moment diagnostic: the seed mean of `∫ |X_t - a|^{-α} dt` for each
/// exponent, the ratio of its first-half and second-half seed means, and a
/// heavy-tail flag when the largest sample exceeds ten times the mean.
pub fn besov_embedding_experiment(
    fprime: &BVFunction,
    spec: &ProcessSpec,
    beta: FracOrder,
    epsilon: f64,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    opts.validate()?;
    if !(epsilon > 0.0) {
        return validation(format!("epsilon must be positive, got {epsilon}"));
    }
    let per_seed = opts
        .seeds
        .par_iter()
        .map(|&seed| {
            let fine = simulate(spec, opts, seed)?;
            let alpha = holder_estimate(&fine)?.alpha;
            let mut rows = Vec::new();
            for level in opts.levels() {
                let x = fine.subsample(opts.stride(level))?;
                let z = x.map(|v| fprime.evaluate(v))?;
                let norm = besov_norm_w2_with(&z, beta, Reconstruction::PiecewiseConstantLeft);
                rows.push(ReportRow::residual(x.len(), seed, norm.value));
            }
            let moments: Vec<f64> =
                MOMENT_EXPONENTS.iter().map(|&a| inverse_moment_integral(&fine, MOMENT_LEVEL, a)).collect();
            Ok((SeedOutcome { rows, terminal: fine.last(), alpha }, moments))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = BTreeMap::new();
    let k = per_seed.len();
    for (e, exponent) in MOMENT_EXPONENTS.iter().enumerate() {
        let samples: Vec<f64> = per_seed.iter().map(|(_, m)| m[e]).collect();
        let mean = samples.iter().sum::<f64>() / k as f64;
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        summary.insert(format!("moment_mean_{exponent}"), mean);
        if k >= 2 {
            let half = k / 2;
            let first = samples[..half].iter().sum::<f64>() / half as f64;
            let second = samples[half..].iter().sum::<f64>() / (k - half) as f64;
            summary.insert(format!("moment_half_ratio_{exponent}"), first / second);
        }
        summary.insert(format!("moment_heavy_tail_{exponent}"), f64::from(u8::from(max > 10.0 * mean)));
    }
    let outcomes: Vec<SeedOutcome> = per_seed.into_iter().map(|(o, _)| o).collect();
    let alpha_mean = outcomes.iter().map(|o| o.alpha).sum::<f64>() / outcomes.len() as f64;
    let in_regime = beta.value() < alpha_mean;
    let stable = outcomes.iter().all(|o| {
        o.rows.iter().all(|r| r.value.is_finite())
            && o.rows.windows(2).all(|w| (0.5..=2.0).contains(&(w[1].value / w[0].value)))
    });
    summary.insert("stable".into(), f64::from(u8::from(stable)));
    summary.insert("in_regime".into(), f64::from(u8::from(in_regime)));
    let params = serde_json::json!({
        "spec": spec, "options": opts, "fprime": fprime, "beta": beta, "epsilon": epsilon,
    });
    let mut report = finish("besov_embedding", params, opts, outcomes, summary);
    report.verdict = match (in_regime, stable) {
        (false, _) => Verdict::Diagnostic,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    };
    Ok(report)
}
