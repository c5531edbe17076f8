//! Radon measures made of atoms plus a piecewise-constant density, functions
//! of locally bounded variation represented through such measures, compact
//! truncation, and one-sided mollification.
//!
//! A non-decreasing left-continuous function is stored as a constant `C` and
//! a measure `μ`, and evaluates to `C + ½∫ sgn(x - a) μ(da)` with
//! `sgn(0) = -1`, i.e. `C + μ((-∞, x)) - μ(ℝ)/2`. This is the left
//! derivative of the convex function whose second derivative is `μ`.
//! Singular-continuous measures are not representable.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::quad::{gauss_legendre_unit, integrate_adaptive};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub a: f64,
    pub w: f64,
}

/// Piecewise-constant density: `levels[i]` on `[breaks[i], breaks[i+1])`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Density {
    pub breaks: Vec<f64>,
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RadonMeasureRaw {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    density: Density,
    support: [f64; 2],
}

/// Positive measure with atoms and a piecewise-constant density, supported in
/// the closed interval `support`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadonMeasureRaw", into = "RadonMeasureRaw")]
pub struct RadonMeasure {
    raw: RadonMeasureRaw,
    /// Atoms sorted by location.
    atoms: Vec<Atom>,
    /// `atom_cum[i]` = total weight of `atoms[..i]`.
    atom_cum: Vec<f64>,
    /// `density_cum[i]` = density mass below `breaks[i]`.
    density_cum: Vec<f64>,
}

impl TryFrom<RadonMeasureRaw> for RadonMeasure {
    type Error = Error;
    fn try_from(raw: RadonMeasureRaw) -> Result<Self> {
        let [lo, hi] = raw.support;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return validation(format!("invalid support [{lo}, {hi}]"));
        }
        for atom in &raw.atoms {
            if !(atom.w > 0.0) || !atom.w.is_finite() || !atom.a.is_finite() {
                return validation(format!("atom at {} needs a finite positive weight", atom.a));
            }
            if atom.a < lo || atom.a > hi {
                return validation(format!("atom at {} outside support [{lo}, {hi}]", atom.a));
            }
        }
        let d = &raw.density;
        if !(d.breaks.is_empty() && d.levels.is_empty()) {
            if d.breaks.len() != d.levels.len() + 1 {
                return validation("density needs one more break than levels");
            }
            if d.breaks.iter().any(|b| !b.is_finite()) || d.breaks.windows(2).any(|w| w[1] <= w[0]) {
                return validation("density breaks must be finite and strictly increasing");
            }
            if d.levels.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
                return validation("density levels must be finite and nonnegative");
            }
            if d.breaks[0] < lo || *d.breaks.last().expect("non-empty") > hi {
                return validation("density extends outside the support");
            }
        }
        let mut atoms = raw.atoms.clone();
        atoms.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut atom_cum = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        atom_cum.push(0.0);
        for a in &atoms {
            acc += a.w;
            atom_cum.push(acc);
        }
        let mut density_cum = Vec::with_capacity(d.breaks.len());
        let mut acc = 0.0;
        if !d.breaks.is_empty() {
            density_cum.push(0.0);
            for (w, l) in d.breaks.windows(2).zip(&d.levels) {
                acc += l * (w[1] - w[0]);
                density_cum.push(acc);
            }
        }
        Ok(Self { raw, atoms, atom_cum, density_cum })
    }
}

impl From<RadonMeasure> for RadonMeasureRaw {
    fn from(m: RadonMeasure) -> Self {
        m.raw
    }
}

impl RadonMeasure {
    pub fn new(atoms: Vec<Atom>, density: Density, support: [f64; 2]) -> Result<Self> {
        RadonMeasureRaw { atoms, density, support }.try_into()
    }

    pub fn zero() -> Self {
        Self::new(Vec::new(), Density::default(), [0.0, 0.0]).expect("zero measure is valid")
    }

    /// Unit-free point mass `w δ_a`.
    pub fn dirac(a: f64, w: f64) -> Result<Self> {
        Self::new(vec![Atom { a, w }], Density::default(), [a, a])
    }

    /// Constant density `level` on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, level: f64) -> Result<Self> {
        Self::new(Vec::new(), Density { breaks: vec![lo, hi], levels: vec![level] }, [lo, hi])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &Density {
        &self.raw.density
    }

    pub fn support(&self) -> [f64; 2] {
        self.raw.support
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_cum.last().copied().unwrap_or(0.0) + self.density_cum.last().copied().unwrap_or(0.0)
    }

    fn density_below(&self, x: f64) -> f64 {
        let b = &self.raw.density.breaks;
        if b.is_empty() || x <= b[0] {
            return 0.0;
        }
        let i = b.partition_point(|&v| v <= x);
        if i == b.len() {
            return *self.density_cum.last().expect("non-empty");
        }
        self.density_cum[i - 1] + self.raw.density.levels[i - 1] * (x - b[i - 1])
    }

    /// `μ((-∞, x))`.
    pub fn mass_below(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.a < x);
        self.atom_cum[k] + self.density_below(x)
    }

    /// `μ((-∞, x])`.
    pub fn mass_up_to(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.a <= x);
        self.atom_cum[k] + self.density_below(x)
    }

    /// `μ((s, t))`; zero when `s >= t`.
    pub fn mass_open(&self, s: f64, t: f64) -> f64 {
        if s >= t {
            return 0.0;
        }
        (self.mass_below(t) - self.mass_up_to(s)).max(0.0)
    }

    /// Restriction to the closed interval `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let atoms = self.atoms.iter().copied().filter(|a| a.a >= lo && a.a <= hi).collect();
        let d = &self.raw.density;
        let mut breaks = Vec::new();
        let mut levels = Vec::new();
        for (w, &l) in d.breaks.windows(2).zip(&d.levels) {
            let (a, b) = (w[0].max(lo), w[1].min(hi));
            if b <= a {
                continue;
            }
            if breaks.last() != Some(&a) {
                if !breaks.is_empty() {
                    // Gap between pieces: fill with a zero level.
                    levels.push(0.0);
                }
                breaks.push(a);
            }
            breaks.push(b);
            levels.push(l);
        }
        let [slo, shi] = self.raw.support;
        let support = [slo.max(lo), shi.min(hi)];
        let support = if support[0] > support[1] { [lo.max(slo), lo.max(slo)] } else { support };
        Self::new(atoms, Density { breaks, levels }, support)
    }

    /// `∫ g dμ`; density pieces use a composite 8-point Gauss rule.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let (x, w) = gauss_legendre_unit(8);
        let mut total: f64 = self.atoms.iter().map(|a| a.w * g(a.a)).sum();
        let d = &self.raw.density;
        const PANELS: usize = 64;
        for (br, &l) in d.breaks.windows(2).zip(&d.levels) {
            if l == 0.0 {
                continue;
            }
            let h = (br[1] - br[0]) / PANELS as f64;
            let mut piece = 0.0;
            for p in 0..PANELS {
                let lo = br[0] + p as f64 * h;
                piece += x.iter().zip(&w).map(|(xi, wi)| wi * g(lo + h * xi)).sum::<f64>();
            }
            total += l * piece * h;
        }
        total
    }

    /// `∫ [(x - a)^+ - (-a)^+] μ(da)`.
    fn ramp_integral(&self, x: f64) -> f64 {
        let ramp = |a: f64| (x - a).max(0.0) - (-a).max(0.0);
        let mut total: f64 = self.atoms.iter().map(|a| a.w * ramp(a.a)).sum();
        // ∫_{b0}^{b1} (c - a)^+ da = ½[((c - b0)^+)² - ((c - b1)^+)²].
        let half_sq = |c: f64, b0: f64, b1: f64| {
            0.5 * ((c - b0).max(0.0).powi(2) - (c - b1).max(0.0).powi(2))
        };
        let d = &self.raw.density;
        for (br, &l) in d.breaks.windows(2).zip(&d.levels) {
            total += l * (half_sq(x, br[0], br[1]) - half_sq(0.0, br[0], br[1]));
        }
        total
    }
}

/// Non-decreasing left-continuous function `C + μ((-∞, x)) - μ(ℝ)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonePart {
    pub constant: f64,
    #[serde(flatten)]
    pub measure: RadonMeasure,
}

impl MonotonePart {
    pub fn new(constant: f64, measure: RadonMeasure) -> Self {
        Self { constant, measure }
    }

    pub fn zero() -> Self {
        Self::new(0.0, RadonMeasure::zero())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.constant + self.measure.mass_below(x) - 0.5 * self.measure.total_mass()
    }

    /// `∫_0^x` of [`Self::eval`].
    pub fn antiderivative(&self, x: f64) -> f64 {
        (self.constant - 0.5 * self.measure.total_mass()) * x + self.measure.ramp_integral(x)
    }

    pub fn truncate(&self, n: f64) -> Result<Self> {
        let mu = &self.measure;
        let below = mu.mass_below(-n);
        let above = mu.total_mass() - mu.mass_up_to(n);
        let restricted = mu.restrict(-n, n)?;
        if below == 0.0 && above == 0.0 {
            return Ok(Self::new(self.constant, restricted));
        }
        let constant =
            self.constant + below - 0.5 * mu.total_mass() + 0.5 * restricted.total_mass();
        Ok(Self::new(constant, restricted))
    }
}

/// Function of locally bounded variation as the difference of two
/// non-decreasing left-continuous parts (a Jordan decomposition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BVFunction {
    pub positive: MonotonePart,
    #[serde(default = "MonotonePart::zero")]
    pub negative: MonotonePart,
}

impl BVFunction {
    pub fn new(positive: MonotonePart, negative: MonotonePart) -> Self {
        Self { positive, negative }
    }

    /// Left derivative of the convex function with second derivative `μ`.
    pub fn convex(constant: f64, measure: RadonMeasure) -> Self {
        Self::new(MonotonePart::new(constant, measure), MonotonePart::zero())
    }

    pub fn constant(c: f64) -> Self {
        Self::convex(c, RadonMeasure::zero())
    }

    /// `1_{x > a}`: the left derivative of `(x - a)^+`.
    pub fn indicator_above(a: f64) -> Self {
        Self::convex(0.5, RadonMeasure::dirac(a, 1.0).expect("finite location"))
    }

    /// Left-continuous value `f'_-(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.positive.eval(x) - self.negative.eval(x)
    }

    /// `f(x) = ∫_0^x f'_-(y) dy`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        self.positive.antiderivative(x) - self.negative.antiderivative(x)
    }

    /// Smallest interval containing the supports of both parts.
    pub fn support(&self) -> [f64; 2] {
        let parts = [&self.positive.measure, &self.negative.measure];
        let nonzero: Vec<[f64; 2]> =
            parts.iter().filter(|m| m.total_mass() > 0.0).map(|m| m.support()).collect();
        if nonzero.is_empty() {
            return [0.0, 0.0];
        }
        let lo = nonzero.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
        let hi = nonzero.iter().map(|s| s[1]).fold(f64::NEG_INFINITY, f64::max);
        [lo, hi]
    }

    /// Restricts both measures to `[-n, n]` and adjusts the constants so the
    /// function is unchanged on `(-n, n]` and constant outside.
    pub fn truncate_to_compact(&self, n: f64) -> Result<Self> {
        if !(n > 0.0) || n.is_nan() {
            return validation(format!("truncation level must be positive, got {n}"));
        }
        Ok(Self::new(self.positive.truncate(n)?, self.negative.truncate(n)?))
    }

    /// Total mass of `μ⁺ + μ⁻`.
    pub fn total_variation(&self) -> f64 {
        self.positive.measure.total_mass() + self.negative.measure.total_mass()
    }
}

/// Two-dimensional truncation: `f_n(x, y) = f(clamp(x), clamp(y))` with
/// clamping to `[-n, n]`, which agrees with `f` on the square.
pub fn truncate_2d(f: impl Fn(f64, f64) -> f64, n: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| f(x.clamp(-n, n), y.clamp(-n, n))
}

const PROFILE_INTERVALS: usize = 4096;

/// Smooth bump `exp(-1/(1 - (2z+1)^2))` on `(-1, 0)`, normalized to unit
/// mass, with a tabulated distribution function `Φ` and its integral `Ψ`.
#[derive(Debug)]
pub struct BumpProfile {
    norm: f64,
    cdf: Vec<f64>,
    cdf_integral: Vec<f64>,
}

fn raw_bump(z: f64) -> f64 {
    if z <= -1.0 || z >= 0.0 {
        return 0.0;
    }
    let u = 2.0 * z + 1.0;
    (-1.0 / (1.0 - u * u)).exp()
}

impl BumpProfile {
    pub fn standard() -> &'static BumpProfile {
        static PROFILE: OnceLock<BumpProfile> = OnceLock::new();
        PROFILE.get_or_init(Self::build)
    }

    fn build() -> Self {
        let h = 1.0 / PROFILE_INTERVALS as f64;
        let (x, w) = gauss_legendre_unit(8);
        let mut cdf = Vec::with_capacity(PROFILE_INTERVALS + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 0..PROFILE_INTERVALS {
            let lo = -1.0 + i as f64 * h;
            acc += h * x.iter().zip(&w).map(|(xi, wi)| wi * raw_bump(lo + h * xi)).sum::<f64>();
            cdf.push(acc);
        }
        let norm = acc;
        for c in &mut cdf {
            *c /= norm;
        }
        *cdf.last_mut().expect("non-empty") = 1.0;
        let dens = |i: usize| raw_bump(-1.0 + i as f64 * h) / norm;
        let mut cdf_integral = Vec::with_capacity(PROFILE_INTERVALS + 1);
        let mut acc = 0.0;
        cdf_integral.push(0.0);
        for i in 0..PROFILE_INTERVALS {
            acc += h * 0.5 * (cdf[i] + cdf[i + 1]) + h * h * (dens(i) - dens(i + 1)) / 12.0;
            cdf_integral.push(acc);
        }
        Self { norm, cdf, cdf_integral }
    }

    /// Normalized profile `φ(z)`.
    pub fn density(&self, z: f64) -> f64 {
        raw_bump(z) / self.norm
    }

    fn locate(&self, z: f64) -> (usize, f64, f64) {
        let h = 1.0 / PROFILE_INTERVALS as f64;
        let pos = (z + 1.0) * PROFILE_INTERVALS as f64;
        let i = (pos.floor() as usize).min(PROFILE_INTERVALS - 1);
        (i, pos - i as f64, h)
    }

    /// `Φ(z) = ∫_{-1}^z φ`, by cubic Hermite interpolation of the table.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= -1.0 {
            return 0.0;
        }
        if z >= 0.0 {
            return 1.0;
        }
        let (i, s, h) = self.locate(z);
        let z0 = -1.0 + i as f64 * h;
        let (d0, d1) = (self.density(z0), self.density(z0 + h));
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.cdf[i]
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * self.cdf[i + 1]
            + (s3 - s2) * h * d1
    }

    /// `Ψ(z) = ∫_{-1}^z Φ`.
    pub fn cdf_integral(&self, z: f64) -> f64 {
        if z <= -1.0 {
            return 0.0;
        }
        if z >= 0.0 {
            return self.cdf_integral[PROFILE_INTERVALS] + z;
        }
        let (i, s, h) = self.locate(z);
        let z0 = -1.0 + i as f64 * h;
        let (d0, d1) = (self.density(z0), self.density(z0 + h));
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        self.cdf_integral[i]
            + h * ((s - s3 + 0.5 * s4) * self.cdf[i]
                + (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4) * h * d0
                + (s3 - 0.5 * s4) * self.cdf[i + 1]
                + (-s3 / 3.0 + 0.25 * s4) * h * d1)
    }
}

/// One-sided mollifier `n φ(n y)` at integer scale `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mollifier {
    pub scale: u32,
}

impl Mollifier {
    pub fn new(scale: u32) -> Result<Self> {
        if scale == 0 {
            return validation("mollifier scale must be positive");
        }
        Ok(Self { scale })
    }
}

/// `f_n(x) = n ∫_{-∞}^0 f(x + y) φ(n y) dy` for `f = ∫_0^x f'_-`, with its
/// first and second derivatives.
#[derive(Debug, Clone)]
pub struct Mollified<'a> {
    f: &'a BVFunction,
    n: f64,
    profile: &'static BumpProfile,
}

/// Mollifies `f`; both measures must have bounded support.
pub fn mollify(f: &BVFunction, m: Mollifier) -> Result<Mollified<'_>> {
    let [lo, hi] = f.support();
    if !lo.is_finite() || !hi.is_finite() {
        return validation("mollification needs compactly supported measures; truncate first");
    }
    Ok(Mollified { f, n: m.scale as f64, profile: BumpProfile::standard() })
}

impl Mollified<'_> {
    pub fn scale(&self) -> f64 {
        self.n
    }

    /// `∫ (1 - Φ(n (a - x))) μ(da)`.
    fn smoothed_mass_below(&self, mu: &RadonMeasure, x: f64) -> f64 {
        let n = self.n;
        let p = self.profile;
        let mut total: f64 = mu.atoms().iter().map(|a| a.w * (1.0 - p.cdf(n * (a.a - x)))).sum();
        let d = mu.density();
        for (br, &l) in d.breaks.windows(2).zip(&d.levels) {
            let integral = (p.cdf_integral(n * (br[1] - x)) - p.cdf_integral(n * (br[0] - x))) / n;
            total += l * ((br[1] - br[0]) - integral);
        }
        total
    }

    /// `n ∫ φ(n (a - x)) μ(da)`.
    fn smoothed_density(&self, mu: &RadonMeasure, x: f64) -> f64 {
        let n = self.n;
        let p = self.profile;
        let mut total: f64 = mu.atoms().iter().map(|a| a.w * n * p.density(n * (a.a - x))).sum();
        let d = mu.density();
        for (br, &l) in d.breaks.windows(2).zip(&d.levels) {
            total += l * (p.cdf(n * (br[1] - x)) - p.cdf(n * (br[0] - x)));
        }
        total
    }

    pub fn first_derivative(&self, x: f64) -> f64 {
        let part = |m: &MonotonePart| {
            m.constant - 0.5 * m.measure.total_mass() + self.smoothed_mass_below(&m.measure, x)
        };
        part(&self.f.positive) - part(&self.f.negative)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.smoothed_density(&self.f.positive.measure, x)
            - self.smoothed_density(&self.f.negative.measure, x)
    }

    /// Trapezoid rule over the tabulated bump nodes.
    pub fn value(&self, x: f64) -> f64 {
        let h = 1.0 / PROFILE_INTERVALS as f64;
        (1..PROFILE_INTERVALS)
            .map(|i| {
                let z = -1.0 + i as f64 * h;
                self.f.antiderivative(x + z / self.n) * self.profile.density(z)
            })
            .sum::<f64>()
            * h
    }

    /// `∫ g f''_n dx = ∫∫ g(a - z/n) φ(z) dz μ(da)` (difference of the parts).
    pub fn integrate_second_derivative(&self, g: impl Fn(f64) -> f64) -> f64 {
        let (x, w) = gauss_legendre_unit(8);
        const PANELS: usize = 32;
        let h = 1.0 / PANELS as f64;
        let n = self.n;
        let p = self.profile;
        let smooth_g = |a: f64| {
            let mut acc = 0.0;
            for k in 0..PANELS {
                let lo = -1.0 + k as f64 * h;
                for (xi, wi) in x.iter().zip(&w) {
                    let z = lo + h * xi;
                    acc += wi * g(a - z / n) * p.density(z);
                }
            }
            acc * h
        };
        self.f.positive.measure.integrate(smooth_g) - self.f.negative.measure.integrate(smooth_g)
    }
}

/// Outcome of comparing `μ((s, t))` with `∫_s^t f''_n` along a scale sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiminfReport {
    pub measure_side: f64,
    /// `(n, ∫_s^t f''_n)` for each requested scale.
    pub smoothed_side: Vec<(u32, f64)>,
    /// Minimum over the second half of the scale list.
    pub liminf_proxy: f64,
    pub holds: bool,
}

/// Checks `μ((s, t)) <= liminf_n ∫_{s<a<t} f''_n(a) da` with slack `1e-3 · μ(ℝ)`.
pub fn liminf_measure_bound_check(
    measure: &RadonMeasure,
    s_val: f64,
    t_val: f64,
    scales: &[u32],
) -> Result<LiminfReport> {
    if !(s_val < t_val) {
        return validation(format!("need s < t, got s={s_val}, t={t_val}"));
    }
    if scales.is_empty() || scales.contains(&0) {
        return validation("scales must be a non-empty list of positive integers");
    }
    let f = BVFunction::convex(0.0, measure.clone());
    let smoothed_side = scales
        .iter()
        .map(|&n| {
            let m = mollify(&f, Mollifier::new(n)?)?;
            Ok((n, m.first_derivative(t_val) - m.first_derivative(s_val)))
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &smoothed_side[smoothed_side.len() / 2..];
    let liminf_proxy = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let measure_side = measure.mass_open(s_val, t_val);
    let holds = liminf_proxy >= measure_side - 1e-3 * measure.total_mass();
    Ok(LiminfReport { measure_side, smoothed_side, liminf_proxy, holds })
}

/// `∫_a^b g dx` by adaptive quadrature; convenience for callers comparing
/// smoothed quantities against direct integration.
pub fn integrate_interval(g: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    integrate_adaptive(g, a, b, 1e-12, 1e-10)
}
