//! p-variation along partitions, its supremum over sub-partitions of the
//! sampling grid, and quadratic variation along partition sequences.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::numeric::pow_abs;
use crate::paths::SampledPath;

/// Default largest grid handled by the exact O(n²) supremum.
pub const DEFAULT_SUP_CAP: usize = 1 << 15;

/// Where the evaluation tag sits inside each partition interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagRule {
    /// Left endpoint (forward / Föllmer sums).
    #[default]
    Forward,
    /// Right endpoint.
    Backward,
    /// Grid point nearest the middle of the interval (lower one on ties).
    Midpoint,
}

impl TagRule {
    fn pick(self, lo: usize, hi: usize) -> usize {
        match self {
            TagRule::Forward => lo,
            TagRule::Backward => hi,
            TagRule::Midpoint => lo + (hi - lo) / 2,
        }
    }
}

impl FromStr for TagRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Self::Forward),
            "backward" => Ok(Self::Backward),
            "midpoint" => Ok(Self::Midpoint),
            other => validation(format!("unknown tag rule '{other}'")),
        }
    }
}

impl fmt::Display for TagRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TagRule::Forward => "forward",
            TagRule::Backward => "backward",
            TagRule::Midpoint => "midpoint",
        })
    }
}

/// Partition of a path's grid given by grid indices, with one tag index per
/// interval. `points[0] = 0`, `points.last() = n - 1`, strictly increasing,
/// and `points[i] <= tags[i] <= points[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedPartition {
    points: Vec<usize>,
    tags: Vec<usize>,
    grid_len: usize,
}

impl TaggedPartition {
    pub fn new(points: Vec<usize>, tags: Vec<usize>, grid_len: usize) -> Result<Self> {
        if points.len() < 2 {
            return validation("a partition needs at least two points");
        }
        if points[0] != 0 || *points.last().expect("non-empty") + 1 != grid_len {
            return validation("partition must start at the first and end at the last grid point");
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return validation("partition points must be strictly increasing");
        }
        if tags.len() + 1 != points.len() {
            return validation("need exactly one tag per partition interval");
        }
        if let Some(i) = (0..tags.len()).find(|&i| tags[i] < points[i] || tags[i] > points[i + 1]) {
            return validation(format!("tag {i} lies outside its interval"));
        }
        Ok(Self { points, tags, grid_len })
    }

    /// Partition given by grid times, tagged by `rule`.
    pub fn from_times(path: &SampledPath, times: &[f64], rule: TagRule) -> Result<Self> {
        let points = times
            .iter()
            .map(|&t| {
                path.index_of(t)
                    .ok_or_else(|| Error::Validation(format!("partition point {t} is not on the grid")))
            })
            .collect::<Result<Vec<_>>>()?;
        let tags = points.windows(2).map(|w| rule.pick(w[0], w[1])).collect();
        Self::new(points, tags, path.len())
    }

    /// Every grid point is a partition point.
    pub fn full(grid_len: usize, rule: TagRule) -> Result<Self> {
        if grid_len < 2 {
            return validation("grid needs at least two points");
        }
        let points: Vec<usize> = (0..grid_len).collect();
        let tags = points.windows(2).map(|w| rule.pick(w[0], w[1])).collect();
        Self::new(points, tags, grid_len)
    }

    /// `intervals` equal index blocks; `grid_len - 1` must be divisible by `intervals`.
    pub fn uniform(grid_len: usize, intervals: usize, rule: TagRule) -> Result<Self> {
        if intervals == 0 || grid_len < 2 || (grid_len - 1) % intervals != 0 {
            return validation(format!(
                "{intervals} intervals do not evenly divide a grid of {grid_len} points"
            ));
        }
        let stride = (grid_len - 1) / intervals;
        let points: Vec<usize> = (0..=intervals).map(|i| i * stride).collect();
        let tags = points.windows(2).map(|w| rule.pick(w[0], w[1])).collect();
        Self::new(points, tags, grid_len)
    }

    /// Dyadic partition with `2^level` intervals.
    pub fn dyadic(grid_len: usize, level: u32, rule: TagRule) -> Result<Self> {
        let intervals = 1usize
            .checked_shl(level)
            .ok_or_else(|| Error::Validation(format!("dyadic level {level} too large")))?;
        Self::uniform(grid_len, intervals, rule)
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn point_times(&self, path: &SampledPath) -> Vec<f64> {
        self.points.iter().map(|&i| path.times()[i]).collect()
    }

    pub fn tag_times(&self, path: &SampledPath) -> Vec<f64> {
        self.tags.iter().map(|&i| path.times()[i]).collect()
    }

    /// Largest interval length in time units.
    pub fn mesh(&self, path: &SampledPath) -> f64 {
        let t = path.times();
        self.points.windows(2).map(|w| t[w[1]] - t[w[0]]).fold(0.0, f64::max)
    }

    pub(crate) fn check_path(&self, path: &SampledPath) -> Result<()> {
        if path.len() != self.grid_len {
            return validation(format!(
                "partition built for {} grid points, path has {}",
                self.grid_len,
                path.len()
            ));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        validation(format!("p must be a finite number >= 1, got {p}"))
    }
}

/// `Σ |f(t_k) - f(t_{k-1})|^p` along the partition.
pub fn p_variation(path: &SampledPath, part: &TaggedPartition, p: f64) -> Result<f64> {
    check_p(p)?;
    part.check_path(path)?;
    let x = path.values();
    Ok(part.points.windows(2).map(|w| pow_abs(x[w[1]] - x[w[0]], p)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub p: f64,
    /// p-variation along the full sampling grid.
    pub along_partition: f64,
    pub supremum: f64,
    /// Grid indices of a maximizing sub-partition.
    pub maximizing_subset: Vec<usize>,
    /// False when the supremum came from the approximate preselection and is
    /// only a lower bound.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupOptions {
    pub cap: usize,
    /// Above the cap, restrict to local extrema and greedily thin them to the
    /// cap instead of failing.
    pub allow_approximate: bool,
}

impl Default for SupOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_SUP_CAP, allow_approximate: false }
    }
}

/// Supremum of the p-variation over all sub-partitions of the grid that
/// contain both endpoints, with the default size cap.
pub fn sup_p_variation(path: &SampledPath, p: f64) -> Result<VariationReport> {
    sup_p_variation_with(path, p, SupOptions::default())
}

pub fn sup_p_variation_with(path: &SampledPath, p: f64, opts: SupOptions) -> Result<VariationReport> {
    check_p(p)?;
    let x = path.values();
    let n = x.len();
    let along = x.windows(2).map(|w| pow_abs(w[1] - w[0], p)).sum();
    let (candidates, exact) = if n <= opts.cap {
        ((0..n).collect::<Vec<_>>(), true)
    } else if opts.allow_approximate {
        let mut c = local_extrema(x);
        if c.len() > opts.cap {
            c = thin_extrema(x, &c, opts.cap.max(2));
        }
        (c, false)
    } else {
        return Err(Error::Size(format!(
            "exact supremum limited to {} points, path has {n}",
            opts.cap
        )));
    };
    let (supremum, subset) = dp_supremum(x, &candidates, p);
    Ok(VariationReport { p, along_partition: along, supremum, maximizing_subset: subset, exact })
}

/// `best[j] = max_{i<j} best[i] + |x_j - x_i|^p` over the candidate indices.
fn dp_supremum(x: &[f64], candidates: &[usize], p: f64) -> (f64, Vec<usize>) {
    let m = candidates.len();
    let vals: Vec<f64> = candidates.iter().map(|&i| x[i]).collect();
    let mut best = vec![0.0; m];
    let mut from = vec![0usize; m];
    for j in 1..m {
        let vj = vals[j];
        let mut b = f64::NEG_INFINITY;
        let mut arg = 0;
        for i in 0..j {
            let cand = best[i] + pow_abs(vj - vals[i], p);
            if cand > b {
                b = cand;
                arg = i;
            }
        }
        best[j] = b;
        from[j] = arg;
    }
    let mut subset = vec![candidates[m - 1]];
    let mut j = m - 1;
    while j > 0 {
        j = from[j];
        subset.push(candidates[j]);
    }
    subset.reverse();
    (best[m - 1], subset)
}

/// Endpoints plus the turning points of the sampled sequence (plateaus are
/// collapsed to their first sample).
fn local_extrema(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut out = vec![0];
    let mut last_dir = 0i8;
    let mut last_idx = 0;
    for i in 1..n {
        let d = x[i] - x[last_idx];
        let dir = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            continue;
        };
        if last_dir != 0 && dir != last_dir {
            out.push(last_idx);
        }
        last_dir = dir;
        last_idx = i;
    }
    if *out.last().expect("non-empty") != n - 1 {
        out.push(n - 1);
    }
    out
}

#[derive(PartialEq)]
struct Gap {
    size: f64,
    left: usize,
    right: usize,
}

impl Eq for Gap {}

impl Ord for Gap {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on size, ties by position for determinism.
        other.size.total_cmp(&self.size).then_with(|| other.left.cmp(&self.left))
    }
}

impl PartialOrd for Gap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Repeatedly drops the interior adjacent pair of extrema with the smallest
/// oscillation until at most `target` points remain. Dropping a pair of
/// consecutive turning points keeps the sequence alternating.
fn thin_extrema(x: &[f64], ext: &[usize], target: usize) -> Vec<usize> {
    let m = ext.len();
    let mut prev: Vec<usize> = (0..m).map(|i| i.wrapping_sub(1)).collect();
    let mut next: Vec<usize> = (1..=m).collect();
    let mut alive = vec![true; m];
    let mut heap = BinaryHeap::new();
    let gap = |a: usize, b: usize| (x[ext[b]] - x[ext[a]]).abs();
    for i in 1..m.saturating_sub(2) {
        heap.push(Gap { size: gap(i, i + 1), left: i, right: i + 1 });
    }
    let mut count = m;
    while count > target {
        let Some(g) = heap.pop() else { break };
        if !alive[g.left] || !alive[g.right] || next[g.left] != g.right {
            continue;
        }
        let (p, q) = (prev[g.left], next[g.right]);
        alive[g.left] = false;
        alive[g.right] = false;
        next[p] = q;
        prev[q] = p;
        count -= 2;
        if p != 0 && q != m - 1 && q < m {
            // p and q become adjacent; only interior pairs may be removed.
            heap.push(Gap { size: gap(p, q), left: p, right: q });
        }
        let pp = prev[p];
        if p != 0 && pp != 0 && pp < m {
            heap.push(Gap { size: gap(pp, p), left: pp, right: p });
        }
        let qq = next[q];
        if q != m - 1 && qq < m - 1 {
            heap.push(Gap { size: gap(q, qq), left: q, right: qq });
        }
    }
    (0..m).filter(|&i| alive[i]).map(|i| ext[i]).collect()
}

/// Quadratic variation along each partition of a sequence.
pub fn quadratic_variation(path: &SampledPath, parts: &[TaggedPartition]) -> Result<Vec<f64>> {
    parts.iter().map(|part| p_variation(path, part, 2.0)).collect()
}
