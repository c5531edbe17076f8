use serde::{Deserialize, Serialize};

use super::SampledPath;
use crate::error::{validation, Result};

/// Empirical Hölder fit `|x(t) - x(s)| ~ constant * |t - s|^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub constant: f64,
}

const MIN_POINTS: usize = 16;
/// Number of block increments entering each maximum.
const GROUP: usize = 16;
const ALPHA_FLOOR: f64 = 1e-3;

/// Estimates the Hölder exponent from maxima of block increments.
///
/// For each dyadic block size `k` the grid is cut into consecutive blocks of
/// `k` cells, the blocks are gathered in groups of `GROUP`, and the maximum
/// of `|x(end) - x(start)|` within each group is averaged over groups. The
/// log of this statistic is regressed on the log of the mean block duration.
/// Keeping the group size fixed across scales keeps the maximum from adding
/// a scale-dependent logarithmic factor. The slope is clipped to
/// `[ALPHA_FLOOR, 1]`; a constant path yields `alpha = 1, constant = 0`.
pub fn holder_estimate(path: &SampledPath) -> Result<HolderEstimate> {
    let n = path.len();
    if n < MIN_POINTS {
        return validation(format!("Hölder estimate needs at least {MIN_POINTS} points, got {n}"));
    }
    let x = path.values();
    let t = path.times();
    let cells = n - 1;
    let mut pts = Vec::new();
    let mut k = 1;
    while cells / (k * GROUP) >= 1 || (pts.len() < 2 && cells / k >= 2) {
        let group = GROUP.min(cells / k);
        let groups = cells / (k * group);
        let mut stat = 0.0;
        let mut dur = 0.0;
        for g in 0..groups {
            let mut max = 0.0f64;
            for b in 0..group {
                let lo = (g * group + b) * k;
                max = max.max((x[lo + k] - x[lo]).abs());
                dur += t[lo + k] - t[lo];
            }
            stat += max;
        }
        pts.push((dur / (groups * group) as f64, stat / groups as f64));
        k *= 2;
    }
    if pts.len() < 2 {
        return validation("path too short for a multi-scale Hölder fit");
    }
    if pts.iter().any(|&(_, o)| o <= 0.0) {
        // Locally constant at some scale: treat as degenerate if constant overall.
        if x.iter().all(|&v| v == x[0]) {
            return Ok(HolderEstimate { alpha: 1.0, constant: 0.0 });
        }
        pts.retain(|&(_, o)| o > 0.0);
        if pts.len() < 2 {
            return Ok(HolderEstimate { alpha: 1.0, constant: 0.0 });
        }
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(d, o)| (d.ln(), o.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(HolderEstimate { alpha: slope.clamp(ALPHA_FLOOR, 1.0), constant: intercept.exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{generate, ProcessSpec};

    #[test]
    fn linear_path_has_exponent_one() {
        let p = SampledPath::from_fn(1.0, 1024, |t| t).unwrap();
        let est = holder_estimate(&p).unwrap();
        assert!(est.alpha >= 0.95, "{est:?}");
        assert!((est.constant - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_path_is_degenerate() {
        let p = SampledPath::from_fn(1.0, 64, |_| 3.0).unwrap();
        assert_eq!(holder_estimate(&p).unwrap(), HolderEstimate { alpha: 1.0, constant: 0.0 });
    }

    #[test]
    fn minimal_length_path_is_accepted() {
        let p = SampledPath::from_fn(1.0, 16, |t| t * t).unwrap();
        let est = holder_estimate(&p).unwrap();
        assert!(est.alpha > 0.5 && est.alpha <= 1.0);
    }

    #[test]
    fn fbm_exponent_near_hurst() {
        let mut acc = 0.0;
        for seed in 0..8 {
            let p = generate(&ProcessSpec::fbm(0.75, 1.0, 1 << 14, seed)).unwrap();
            acc += holder_estimate(&p).unwrap().alpha;
        }
        let mean = acc / 8.0;
        assert!((0.65..=0.8).contains(&mean), "{mean}");
    }

    #[test]
    fn short_path_rejected() {
        let p = SampledPath::from_fn(1.0, 15, |t| t).unwrap();
        assert!(holder_estimate(&p).is_err());
    }

    #[test]
    fn brownian_near_half() {
        let mut acc = 0.0;
        for seed in 0..10 {
            let p = generate(&ProcessSpec::brownian(1.0, 4097, seed)).unwrap();
            acc += holder_estimate(&p).unwrap().alpha;
        }
        let mean = acc / 10.0;
        assert!((mean - 0.5).abs() < 0.07, "{mean}");
    }
}
