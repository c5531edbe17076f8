//! Sample paths and the processes that generate them.
//!
//! A [`SampledPath`] is the universal discrete representation used by every
//! other module: a strictly increasing time grid starting at zero with one
//! finite value per grid point.

mod fbm;
mod holder;
mod density;
pub mod io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

pub use density::{check_density_assumption, VarianceFunction};
pub use fbm::{fgn_autocovariance, fgn_circulant, fgn_cholesky, CHOLESKY_MAX_INCREMENTS};
pub use holder::{holder_estimate, HolderEstimate};

/// Relative tolerance used to decide whether a grid is uniform.
const UNIFORM_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    label: String,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return validation(format!(
                "times and values differ in length ({} vs {})",
                times.len(),
                values.len()
            ));
        }
        if times.len() < 2 {
            return validation("a path needs at least two grid points");
        }
        if times[0] != 0.0 {
            return validation(format!("grid must start at 0, got {}", times[0]));
        }
        if let Some(w) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return validation(format!("times not strictly increasing at index {}", w + 1));
        }
        if !times.iter().all(|t| t.is_finite()) {
            return validation("non-finite grid time");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return validation(format!("non-finite value at index {i}"));
        }
        Ok(Self { times, values, label: label.into() })
    }

    /// Path on the uniform grid `i * horizon / (n - 1)`.
    pub fn uniform(horizon: f64, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return validation("a path needs at least two grid points");
        }
        Self::new(uniform_grid(horizon, n)?, values, label)
    }

    /// Samples `f` on the uniform grid with `n` points.
    pub fn from_fn(horizon: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let times = uniform_grid(horizon, n)?;
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values, "")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("validated non-empty")
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("validated non-empty")
    }

    /// Constant step of the grid, if the grid is uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.times.len();
        let h = self.horizon() / (n - 1) as f64;
        let ok = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= UNIFORM_RTOL * h);
        ok.then_some(h)
    }

    /// Index of the grid point at time `t`, tolerating rounding of the order of `1e-12 * T`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * self.horizon().max(1.0);
        let idx = self.times.partition_point(|&x| x < t - tol);
        (idx < self.times.len() && (self.times[idx] - t).abs() <= tol).then_some(idx)
    }

    pub fn same_grid(&self, other: &SampledPath) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * self.horizon().max(1.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<SampledPath> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        SampledPath::new(self.times.clone(), values, self.label.clone())
    }

    /// Pointwise sum of two paths on the same grid.
    pub fn add(&self, other: &SampledPath) -> Result<SampledPath> {
        if !self.same_grid(other) {
            return validation("paths live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        SampledPath::new(self.times.clone(), values, self.label.clone())
    }

    /// Keeps every `stride`-th grid point; `len - 1` must be divisible by `stride`.
    pub fn subsample(&self, stride: usize) -> Result<SampledPath> {
        if stride == 0 || (self.len() - 1) % stride != 0 {
            return validation(format!(
                "stride {stride} does not divide {} intervals",
                self.len() - 1
            ));
        }
        let times = self.times.iter().step_by(stride).copied().collect();
        let values = self.values.iter().step_by(stride).copied().collect();
        SampledPath::new(times, values, self.label.clone())
    }

    /// Restriction to the grid points `0..=idx`.
    pub fn truncate(&self, idx: usize) -> Result<SampledPath> {
        if idx == 0 || idx >= self.len() {
            return validation(format!("cannot truncate at index {idx}"));
        }
        SampledPath::new(
            self.times[..=idx].to_vec(),
            self.values[..=idx].to_vec(),
            self.label.clone(),
        )
    }
}

pub fn uniform_grid(horizon: f64, n: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return validation(format!("horizon must be positive, got {horizon}"));
    }
    if n < 2 {
        return validation("grid needs at least two points");
    }
    let step = horizon / (n - 1) as f64;
    let mut times: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    times[n - 1] = horizon;
    Ok(times)
}

/// Distribution of compound-Poisson jump sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum JumpDistribution {
    Normal { mean: f64, std: f64 },
    Constant { size: f64 },
    Uniform { low: f64, high: f64 },
}

/// Deterministic drift `sum_k c_k t^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub coefficients: Vec<f64>,
}

impl Drift {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProcessKind {
    Fbm { hurst: f64 },
    Brownian,
    CompoundPoisson { rate: f64, jump_dist: JumpDistribution },
    Drifted { base: Box<ProcessKind>, drift: Drift },
    Mixed { components: Vec<ProcessKind> },
}

impl ProcessKind {
    fn validate(&self, nested_in_mixed: bool) -> Result<()> {
        match self {
            ProcessKind::Fbm { hurst } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return validation(format!("hurst must lie in (0,1), got {hurst}"));
                }
            }
            ProcessKind::Brownian => {}
            ProcessKind::CompoundPoisson { rate, jump_dist } => {
                if !(*rate > 0.0) || !rate.is_finite() {
                    return validation(format!("rate must be positive, got {rate}"));
                }
                match jump_dist {
                    JumpDistribution::Normal { mean, std } => {
                        if !mean.is_finite() || !(*std >= 0.0) || !std.is_finite() {
                            return validation("normal jump law needs finite mean and std >= 0");
                        }
                    }
                    JumpDistribution::Constant { size } => {
                        if !size.is_finite() {
                            return validation("constant jump size must be finite");
                        }
                    }
                    JumpDistribution::Uniform { low, high } => {
                        if !(low < high) || !low.is_finite() || !high.is_finite() {
                            return validation("uniform jump law needs low < high");
                        }
                    }
                }
            }
            ProcessKind::Drifted { base, drift } => {
                if drift.coefficients.iter().any(|c| !c.is_finite()) {
                    return validation("drift coefficients must be finite");
                }
                base.validate(nested_in_mixed)?;
            }
            ProcessKind::Mixed { components } => {
                if nested_in_mixed {
                    return validation("mixed processes cannot be nested");
                }
                if components.len() < 2 {
                    return validation("mixed process needs at least two components");
                }
                for c in components {
                    c.validate(true)?;
                }
            }
        }
        Ok(())
    }

    pub fn is_compound_poisson(&self) -> bool {
        matches!(self, ProcessKind::CompoundPoisson { .. })
    }
}

/// Full description of a simulated trajectory. Mixed components share the
/// parent's horizon and grid; component `i` is seeded with `seed ^ i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub horizon: f64,
    pub grid_size: usize,
    pub seed: u64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, horizon: f64, grid_size: usize, seed: u64) -> Self {
        Self { kind, horizon, grid_size, seed }
    }

    pub fn fbm(hurst: f64, horizon: f64, grid_size: usize, seed: u64) -> Self {
        Self::new(ProcessKind::Fbm { hurst }, horizon, grid_size, seed)
    }

    pub fn brownian(horizon: f64, grid_size: usize, seed: u64) -> Self {
        Self::new(ProcessKind::Brownian, horizon, grid_size, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_grid_size(&self, grid_size: usize) -> Self {
        Self { grid_size, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return validation(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.grid_size < 2 {
            return validation("grid_size must be at least 2");
        }
        self.kind.validate(false)
    }

    /// Spec for mixed component `index`, with the derived seed.
    pub fn component(&self, index: usize) -> Result<ProcessSpec> {
        match &self.kind {
            ProcessKind::Mixed { components } => components
                .get(index)
                .map(|k| ProcessSpec::new(k.clone(), self.horizon, self.grid_size, self.seed ^ index as u64))
                .ok_or_else(|| Error::Validation(format!("no mixed component {index}"))),
            _ => validation("not a mixed process"),
        }
    }
}

/// Simulates the process described by `spec`.
pub fn generate(spec: &ProcessSpec) -> Result<SampledPath> {
    spec.validate()?;
    let times = uniform_grid(spec.horizon, spec.grid_size)?;
    let values = match &spec.kind {
        ProcessKind::Mixed { components } => {
            let mut acc = vec![0.0; spec.grid_size];
            for i in 0..components.len() {
                let part = generate(&spec.component(i)?)?;
                for (a, v) in acc.iter_mut().zip(part.values()) {
                    *a += v;
                }
            }
            acc
        }
        kind => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            sample_kind(kind, &times, &mut rng)?
        }
    };
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("generated non-finite value at index {i}")));
    }
    SampledPath::new(times, values, kind_label(&spec.kind))
}

/// Generates each component of a mixed spec separately (a single-element
/// vector for other kinds).
pub fn generate_components(spec: &ProcessSpec) -> Result<Vec<SampledPath>> {
    match &spec.kind {
        ProcessKind::Mixed { components } => {
            spec.validate()?;
            (0..components.len()).map(|i| generate(&spec.component(i)?)).collect()
        }
        _ => Ok(vec![generate(spec)?]),
    }
}

/// Jump times and sizes of a compound Poisson process on `[0, horizon]`.
pub fn poisson_jumps(
    rate: f64,
    jump_dist: &JumpDistribution,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, f64)>> {
    let wait = Exp::new(rate).map_err(|e| Error::Validation(e.to_string()))?;
    let mut jumps = Vec::new();
    let mut t = 0.0;
    loop {
        t += wait.sample(rng);
        if t > horizon {
            break;
        }
        let size = match jump_dist {
            JumpDistribution::Normal { mean, std } => Normal::new(*mean, *std)
                .map_err(|e| Error::Validation(e.to_string()))?
                .sample(rng),
            JumpDistribution::Constant { size } => *size,
            JumpDistribution::Uniform { low, high } => Uniform::new(*low, *high)
                .map_err(|e| Error::Validation(e.to_string()))?
                .sample(rng),
        };
        jumps.push((t, size));
    }
    Ok(jumps)
}

fn sample_kind(kind: &ProcessKind, times: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = times.len();
    let horizon = times[n - 1];
    let step = horizon / (n - 1) as f64;
    match kind {
        ProcessKind::Brownian => Ok(brownian_values(n, step, rng)),
        ProcessKind::Fbm { hurst } if *hurst == 0.5 => Ok(brownian_values(n, step, rng)),
        ProcessKind::Fbm { hurst } => {
            let incr = fbm::fgn(*hurst, n - 1, step, rng)?;
            Ok(cumulative(&incr))
        }
        ProcessKind::CompoundPoisson { rate, jump_dist } => {
            let jumps = poisson_jumps(*rate, jump_dist, horizon, rng)?;
            // Left limits: a jump at time tau shows up at grid points t > tau.
            let mut values = vec![0.0; n];
            let mut level = 0.0;
            let mut next = 0;
            for (i, &t) in times.iter().enumerate() {
                while next < jumps.len() && jumps[next].0 < t {
                    level += jumps[next].1;
                    next += 1;
                }
                values[i] = level;
            }
            Ok(values)
        }
        ProcessKind::Drifted { base, drift } => {
            let mut values = sample_kind(base, times, rng)?;
            for (v, &t) in values.iter_mut().zip(times) {
                *v += drift.eval(t);
            }
            Ok(values)
        }
        ProcessKind::Mixed { .. } => validation("mixed processes are generated component-wise"),
    }
}

fn brownian_values(n: usize, step: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = step.sqrt();
    let incr: Vec<f64> = (1..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect();
    cumulative(&incr)
}

fn cumulative(incr: &[f64]) -> Vec<f64> {
    let mut values = Vec::with_capacity(incr.len() + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for d in incr {
        acc += d;
        values.push(acc);
    }
    values
}

fn kind_label(kind: &ProcessKind) -> String {
    match kind {
        ProcessKind::Fbm { hurst } => format!("fbm(H={hurst})"),
        ProcessKind::Brownian => "brownian".into(),
        ProcessKind::CompoundPoisson { rate, .. } => format!("compound_poisson(rate={rate})"),
        ProcessKind::Drifted { base, .. } => format!("drifted({})", kind_label(base)),
        ProcessKind::Mixed { components } => {
            let parts: Vec<String> = components.iter().map(kind_label).collect();
            format!("mixed({})", parts.join("+"))
        }
    }
}
