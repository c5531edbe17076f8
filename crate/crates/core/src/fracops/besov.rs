use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{abs_linear_moment, moments, UniformTable};
use super::{FracOrder, Reconstruction};
use crate::error::{validation, Error, Result};
use crate::numeric::pow_abs;
use crate::paths::SampledPath;
use crate::quad::gauss_legendre_unit;

/// Norm values above this are reported as saturated (+∞).
pub const NORM_CAP: f64 = 1e12;

/// A norm value with an explicit saturation flag; `value` is `+∞` when saturated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub saturated: bool,
}

impl NormReport {
    fn from_raw(raw: f64) -> Self {
        if raw.is_finite() && raw <= NORM_CAP {
            Self { value: raw, saturated: false }
        } else {
            Self { value: f64::INFINITY, saturated: true }
        }
    }

    pub fn is_finite(&self) -> bool {
        !self.saturated
    }
}

/// `‖f‖_{1,β}` with the piecewise linear reconstruction.
pub fn besov_norm_w1(f: &SampledPath, beta: FracOrder) -> NormReport {
    besov_norm_w1_with(f, beta, Reconstruction::PiecewiseLinear)
}

/// Discrete `‖f‖_{1,β} = sup_{s<t} |f(t)-f(s)|/(t-s)^β + ∫_s^t |f(u)-f(s)|/(u-s)^{1+β} du`,
/// with the supremum over pairs of grid points and the inner integral exact
/// for the reconstruction.
pub fn besov_norm_w1_with(f: &SampledPath, beta: FracOrder, recon: Reconstruction) -> NormReport {
    let b = beta.value();
    let e = -1.0 - b;
    let t = f.times();
    let x = f.values();
    let n = f.len();
    let uniform = f.uniform_step().map(|h| {
        let table = UniformTable::new(e, h, 2, n - 1);
        let pow: Vec<f64> = (0..n).map(|m| (m as f64 * h).powf(b)).collect();
        (table, pow)
    });
    let best = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let s = t[i];
            let xs = x[i];
            let mut inner = 0.0;
            let mut best = 0.0f64;
            for j in (i + 1)..n {
                let k = j - 1;
                inner += match recon {
                    Reconstruction::PiecewiseLinear if k == i => {
                        let h = t[i + 1] - s;
                        (x[i + 1] - xs).abs() * h.powf(-b) / (1.0 - b)
                    }
                    Reconstruction::PiecewiseConstantLeft if k == i => 0.0,
                    Reconstruction::PiecewiseLinear => {
                        let (fa, fb) = (x[k] - xs, x[k + 1] - xs);
                        match &uniform {
                            Some((tab, _)) if fa * fb >= 0.0 => tab.at(k - i + 1).linear(fa, fb).abs(),
                            _ => abs_linear_moment(e, t[k] - s, t[k + 1] - s, fa, fb),
                        }
                    }
                    Reconstruction::PiecewiseConstantLeft => {
                        let j0 = match &uniform {
                            Some((tab, _)) => tab.j0[k - i + 1],
                            None => moments(e, t[k] - s, t[k + 1] - s).j0,
                        };
                        (x[k] - xs).abs() * j0
                    }
                };
                let dt_pow = match &uniform {
                    Some((_, pow)) => pow[j - i],
                    None => (t[j] - s).powf(b),
                };
                best = best.max((x[j] - xs).abs() / dt_pow + inner);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    NormReport::from_raw(best)
}

/// `‖f‖_{2,β}` with the piecewise linear reconstruction.
pub fn besov_norm_w2(f: &SampledPath, beta: FracOrder) -> NormReport {
    besov_norm_w2_with(f, beta, Reconstruction::PiecewiseLinear)
}

/// `‖f‖_{2,β} = ∫_0^T |f(s)|/s^β ds + ∫_0^T ∫_0^s |f(u)-f(s)|/(s-u)^{1+β} du ds`
/// for the reconstruction of `f`.
pub fn besov_norm_w2_with(f: &SampledPath, beta: FracOrder, recon: Reconstruction) -> NormReport {
    let b = beta.value();
    let t = f.times();
    let x = f.values();
    let first: f64 = (0..f.len() - 1)
        .map(|k| match recon {
            Reconstruction::PiecewiseLinear => abs_linear_moment(-b, t[k], t[k + 1], x[k], x[k + 1]),
            Reconstruction::PiecewiseConstantLeft => x[k].abs() * moments(-b, t[k], t[k + 1]).j0,
        })
        .sum();
    let second = singular_double_integral(f, recon, 1.0, 1.0 + b);
    NormReport::from_raw(first + second)
}

/// `∬_{0<y<x<T} |f̃(x) - f̃(y)|^p / (x - y)^q dy dx` for the reconstruction `f̃`.
///
/// Requires `q < p + 1` for the linear reconstruction. Diagonal and adjacent
/// cell pairs are integrated exactly (up to an 8-point rule on a smooth
/// radial remainder); well separated pairs use tensor Gauss–Legendre rules.
/// Returns `+∞` for the constant reconstruction when `q >= 2` and two
/// adjacent cells differ.
pub fn singular_double_integral(f: &SampledPath, recon: Reconstruction, p: f64, q: f64) -> f64 {
    match recon {
        Reconstruction::PiecewiseLinear => linear_double_integral(f, p, q),
        Reconstruction::PiecewiseConstantLeft => constant_double_integral(f, p, q),
    }
}

/// Gauss–Legendre orders for separated cell pairs, with the largest
/// separation each applies to; the last order covers everything beyond.
const FAR_RULES: [(usize, usize); 3] = [(8, 4), (4, 32), (2, usize::MAX)];

fn far_rule(separation: usize) -> usize {
    FAR_RULES.iter().position(|&(_, max_sep)| separation <= max_sep).unwrap_or(FAR_RULES.len() - 1)
}

fn linear_double_integral(f: &SampledPath, p: f64, q: f64) -> f64 {
    let t = f.times();
    let x = f.values();
    let cells = f.len() - 1;
    let len = |k: usize| t[k + 1] - t[k];
    let slope = |k: usize| (x[k + 1] - x[k]) / len(k);
    let d = p - q;
    let (g8x, g8w) = gauss_legendre_unit(8);

    let diag: f64 = (0..cells)
        .map(|k| pow_abs(slope(k), p) * len(k).powf(d + 2.0) / ((d + 1.0) * (d + 2.0)))
        .sum();

    let adjacent: f64 = (0..cells.saturating_sub(1))
        .map(|j| {
            let (h1, h2) = (len(j), len(j + 1));
            let (a, b) = (slope(j + 1), slope(j));
            let seg = |w1: f64, w2: f64| abs_power_segment(a, b, p, w1, w2);
            let hm = h1.min(h2);
            let hmax = h1.max(h2);
            let mut total = hm.powf(d + 2.0) / (d + 2.0) * seg(0.0, 1.0);
            for (lo, hi) in [(hm, hmax), (hmax, h1 + h2)] {
                if hi <= lo {
                    continue;
                }
                let mut part = 0.0;
                for (&xi, &wi) in g8x.iter().zip(&g8w) {
                    let rho = lo + (hi - lo) * xi;
                    let w_lo = (1.0 - h1 / rho).max(0.0);
                    let w_hi = (h2 / rho).min(1.0);
                    if w_hi > w_lo {
                        part += wi * rho.powf(d + 1.0) * seg(w_lo, w_hi);
                    }
                }
                total += part * (hi - lo);
            }
            total
        })
        .sum();

    let rules: Vec<(Vec<f64>, Vec<f64>)> =
        FAR_RULES.iter().map(|&(order, _)| gauss_legendre_unit(order)).collect();
    let node_values = |rule: &(Vec<f64>, Vec<f64>)| -> Vec<Vec<f64>> {
        (0..cells)
            .map(|k| rule.0.iter().map(|&u| x[k] + (x[k + 1] - x[k]) * u).collect())
            .collect()
    };
    let vals: Vec<Vec<Vec<f64>>> = rules.iter().map(node_values).collect();
    let uniform = f.uniform_step();
    // For uniform grids the kernel weights depend only on the separation.
    let tables: Option<Vec<Vec<Vec<f64>>>> = uniform.map(|h| {
        let build = |r: usize| -> Vec<Vec<f64>> {
            let (nodes, weights) = &rules[r];
            let last = FAR_RULES[r].1.min(cells);
            (0..=last)
                .map(|m| {
                    if m < 2 {
                        return Vec::new();
                    }
                    let mut w = Vec::with_capacity(nodes.len() * nodes.len());
                    for (xa, wa) in nodes.iter().zip(weights) {
                        for (yb, wb) in nodes.iter().zip(weights) {
                            w.push(wa * wb * h * h * ((m as f64 + xa - yb) * h).powf(-q));
                        }
                    }
                    w
                })
                .collect()
        };
        (0..rules.len()).map(build).collect()
    });

    let far: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|j| {
            let mut row = 0.0;
            for k in (j + 2)..cells {
                let m = k - j;
                let r = far_rule(m);
                let (nodes, weights) = &rules[r];
                let vk = &vals[r][k];
                let vj = &vals[r][j];
                let np = nodes.len();
                match &tables {
                    Some(tab) => {
                        let w = &tab[r][m];
                        for a in 0..np {
                            for b in 0..np {
                                row += w[a * np + b] * pow_abs(vk[a] - vj[b], p);
                            }
                        }
                    }
                    None => {
                        let (hk, hj) = (len(k), len(j));
                        for a in 0..np {
                            let xa = t[k] + hk * nodes[a];
                            for b in 0..np {
                                let yb = t[j] + hj * nodes[b];
                                row += weights[a] * weights[b] * hk * hj
                                    * pow_abs(vk[a] - vj[b], p)
                                    * (xa - yb).powf(-q);
                            }
                        }
                    }
                }
            }
            row
        })
        .collect();
    diag + adjacent + far.iter().sum::<f64>()
}

/// `∫_{w1}^{w2} |a w + b (1 - w)|^p dw`.
fn abs_power_segment(a: f64, b: f64, p: f64, w1: f64, w2: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        return 0.0;
    }
    if (a - b).abs() <= 1e-7 * scale {
        let mid = 0.5 * (w1 + w2);
        return pow_abs(a * mid + b * (1.0 - mid), p) * (w2 - w1);
    }
    let anti = |w: f64| {
        let l = a * w + b * (1.0 - w);
        pow_abs(l, p) * l / ((p + 1.0) * (a - b))
    };
    anti(w2) - anti(w1)
}

/// Second antiderivative of `z^{-q}` vanishing with its derivative's
/// constant part dropped; only second differences of it are used.
fn second_antiderivative(z: f64, q: f64) -> f64 {
    if z == 0.0 {
        return if q < 2.0 { 0.0 } else { f64::INFINITY };
    }
    if q == 1.0 {
        z * z.ln() - z
    } else if q == 2.0 {
        -z.ln()
    } else {
        z.powf(2.0 - q) / ((1.0 - q) * (2.0 - q))
    }
}

/// Separations from which the constant-reconstruction kernel switches to a
/// 2x2 Gauss rule to avoid cancellation in the second difference.
const EXACT_RECT_SEPARATION: usize = 64;

fn rectangle_kernel(x0: f64, x1: f64, y0: f64, y1: f64, q: f64, separation: usize) -> f64 {
    if separation >= EXACT_RECT_SEPARATION {
        let nodes = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
        let (hx, hy) = (x1 - x0, y1 - y0);
        let mut acc = 0.0;
        for u in nodes {
            for v in nodes {
                acc += ((x0 + hx * u) - (y0 + hy * v)).powf(-q);
            }
        }
        return 0.25 * acc * hx * hy;
    }
    let fx = |z: f64| second_antiderivative(z, q);
    let val = -(fx(x1 - y1) - fx(x0 - y1) - fx(x1 - y0) + fx(x0 - y0));
    if val.is_nan() {
        f64::INFINITY
    } else {
        val
    }
}

fn constant_double_integral(f: &SampledPath, p: f64, q: f64) -> f64 {
    let t = f.times();
    let x = f.values();
    let cells = f.len() - 1;
    let uniform_kernel: Option<Vec<f64>> = f.uniform_step().map(|h| {
        (0..cells)
            .map(|m| if m == 0 { 0.0 } else { rectangle_kernel(m as f64 * h, (m + 1) as f64 * h, 0.0, h, q, m) })
            .collect()
    });
    let rows: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|j| {
            let mut row = 0.0;
            for k in (j + 1)..cells {
                let diff = x[k] - x[j];
                if diff == 0.0 {
                    continue;
                }
                let kern = match &uniform_kernel {
                    Some(tab) => tab[k - j],
                    None => rectangle_kernel(t[k], t[k + 1], t[j], t[j + 1], q, k - j),
                };
                row += pow_abs(diff, p) * kern;
            }
            row
        })
        .collect();
    rows.iter().sum()
}

/// Result of the empirical Garsia–Rodemich–Rumsey comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrrCheck {
    /// `max |f(t)-f(s)|^p / (T^{αp-1} |t-s|^{αp-1})` over grid pairs.
    pub lhs_max_ratio: f64,
    /// `∬_{[0,T]^2} |f(x)-f(y)|^p / |x-y|^{αp+1}` for the linear reconstruction.
    pub rhs_integral: f64,
}

impl GrrCheck {
    /// Empirical constant `lhs / rhs`, 0 when both vanish.
    pub fn constant(&self) -> f64 {
        if self.lhs_max_ratio == 0.0 {
            0.0
        } else {
            self.lhs_max_ratio / self.rhs_integral
        }
    }
}

pub fn grr_check(f: &SampledPath, p: f64, alpha: f64) -> Result<GrrCheck> {
    if !(p >= 1.0) || !p.is_finite() {
        return validation(format!("p must be >= 1, got {p}"));
    }
    if !(alpha * p > 1.0) || !alpha.is_finite() {
        return validation(format!("need alpha * p > 1, got alpha={alpha}, p={p}"));
    }
    if !(alpha < 1.0) {
        return validation(format!("alpha must be < 1, got {alpha}"));
    }
    let t = f.times();
    let x = f.values();
    let n = f.len();
    let e = alpha * p - 1.0;
    let big_t = f.horizon().powf(e);
    let pow_table = f.uniform_step().map(|h| (0..n).map(|m| (m as f64 * h).powf(e)).collect::<Vec<_>>());
    let lhs = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in (i + 1)..n {
                let dt = match &pow_table {
                    Some(tab) => tab[j - i],
                    None => (t[j] - t[i]).powf(e),
                };
                best = best.max(pow_abs(x[j] - x[i], p) / dt);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
        / big_t;
    let rhs = 2.0 * linear_double_integral(f, p, alpha * p + 1.0);
    if !rhs.is_finite() || !lhs.is_finite() {
        return Err(Error::Numeric("GRR quantities are not finite".into()));
    }
    if rhs == 0.0 && lhs > 0.0 {
        return Err(Error::Numeric("GRR double integral vanishes for a non-constant path".into()));
    }
    Ok(GrrCheck { lhs_max_ratio: lhs, rhs_integral: rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;

    fn order(b: f64) -> FracOrder {
        FracOrder::new(b).unwrap()
    }

    #[test]
    fn zero_function_norms_vanish() {
        let z = SampledPath::from_fn(1.0, 65, |_| 0.0).unwrap();
        assert_eq!(besov_norm_w1(&z, order(0.4)).value, 0.0);
        assert_eq!(besov_norm_w2(&z, order(0.4)).value, 0.0);
    }

    #[test]
    fn linear_function_closed_forms() {
        let f = SampledPath::from_fn(1.0, 257, |t| t).unwrap();
        for b in [0.2, 0.5, 0.8] {
            let w1 = besov_norm_w1(&f, order(b)).value;
            assert!((w1 - (2.0 - b) / (1.0 - b)).abs() < 1e-10, "b={b}: {w1}");
            // Far cell pairs use Gauss rules, so the double integral is not exact.
            let w2 = besov_norm_w2(&f, order(b)).value;
            assert!((w2 - 1.0 / (1.0 - b)).abs() < 1e-8, "b={b}: {w2}");
        }
    }

    #[test]
    fn constant_function_w2() {
        let f = SampledPath::from_fn(1.0, 129, |_| 1.0).unwrap();
        for recon in [Reconstruction::PiecewiseLinear, Reconstruction::PiecewiseConstantLeft] {
            let v = besov_norm_w2_with(&f, order(0.3), recon).value;
            assert!((v - 1.0 / 0.7).abs() < 1e-12, "{recon}: {v}");
        }
    }

    #[test]
    fn double_integral_matches_quadrature_for_smooth_function() {
        // ∬_{y<x} |g(x) - g(y)| / (x-y)^{1.4}; with r = x - y = v^{5/3} the
        // inner integrand is bounded near the diagonal.
        let g = |x: f64| (3.0 * x).sin();
        let c = 5.0 / 3.0;
        let oracle = integrate_adaptive(
            |x| {
                let inner = |v: f64| {
                    let r = v.powf(c);
                    (g(x) - g(x - r)).abs() * r.powf(-1.4) * c * v.powf(c - 1.0)
                };
                integrate_adaptive(inner, 0.0, x.powf(1.0 / c), 1e-12, 1e-10).unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            1e-10,
            1e-8,
        )
        .unwrap();
        let f = SampledPath::from_fn(1.0, 2049, g).unwrap();
        let v = singular_double_integral(&f, Reconstruction::PiecewiseLinear, 1.0, 1.4);
        assert!((v - oracle).abs() < 2e-3 * oracle, "{v} vs {oracle}");
    }

    #[test]
    fn nonuniform_matches_uniform_scheme() {
        let f = SampledPath::from_fn(1.0, 301, |t| (4.0 * t).cos() + t * t).unwrap();
        let times: Vec<f64> = f.times().iter().map(|&t| t * (1.0 + 1e-7 * t)).collect();
        let scale = times[300];
        let times: Vec<f64> = times.iter().map(|t| t / scale).collect();
        let g = SampledPath::new(times, f.values().to_vec(), "").unwrap();
        assert!(g.uniform_step().is_none());
        for recon in [Reconstruction::PiecewiseLinear, Reconstruction::PiecewiseConstantLeft] {
            let a = besov_norm_w2_with(&f, order(0.5), recon).value;
            let b = besov_norm_w2_with(&g, order(0.5), recon).value;
            assert!((a - b).abs() < 1e-5 * a, "{recon}: {a} vs {b}");
            let a = besov_norm_w1_with(&f, order(0.5), recon).value;
            let b = besov_norm_w1_with(&g, order(0.5), recon).value;
            assert!((a - b).abs() < 1e-5 * a, "{recon}: {a} vs {b}");
        }
    }

    #[test]
    fn step_function_w1_grows_w2_converges() {
        let step = |n: usize| SampledPath::from_fn(1.0, n, |t| if t > 0.5 { 1.0 } else { 0.0 }).unwrap();
        let b = order(0.4);
        let w1: Vec<f64> = [65, 257, 1025].iter().map(|&n| besov_norm_w1(&step(n), b).value).collect();
        assert!(w1[1] > 1.5 * w1[0] && w1[2] > 1.5 * w1[1], "{w1:?}");
        let w2: Vec<f64> = [257, 1025, 4097]
            .iter()
            .map(|&n| besov_norm_w2_with(&step(n), b, Reconstruction::PiecewiseConstantLeft).value)
            .collect();
        assert!((w2[2] - w2[1]).abs() < (w2[1] - w2[0]).abs() + 1e-12, "{w2:?}");
        assert!((w2[2] / w2[1] - 1.0).abs() < 0.05, "{w2:?}");
    }

    #[test]
    fn saturation_flag() {
        let f = SampledPath::from_fn(1.0, 3, |t| if t > 0.0 { 1e13 } else { 0.0 }).unwrap();
        let r = besov_norm_w1(&f, order(0.5));
        assert!(r.saturated && r.value.is_infinite());
    }

    #[test]
    fn grr_constant_and_linear() {
        let c = SampledPath::from_fn(1.0, 33, |_| 2.0).unwrap();
        let r = grr_check(&c, 2.0, 0.75).unwrap();
        assert_eq!((r.lhs_max_ratio, r.rhs_integral, r.constant()), (0.0, 0.0, 0.0));
        let lin = |n| SampledPath::from_fn(1.0, n, |t| t).unwrap();
        let a = grr_check(&lin(129), 2.0, 0.75).unwrap();
        let b = grr_check(&lin(513), 2.0, 0.75).unwrap();
        // For f(t)=t: lhs = max (t-s)^{2-0.5} = 1, rhs = 2∬(x-y)^{-0.5} = 2/(0.5*1.5).
        assert!((a.lhs_max_ratio - 1.0).abs() < 1e-12);
        assert!((a.rhs_integral - 2.0 / 0.75).abs() < 1e-8, "{}", a.rhs_integral);
        assert!((a.constant() - b.constant()).abs() < 1e-9);
        assert!(grr_check(&lin(9), 2.0, 0.4).is_err());
    }
}
