//! Power-kernel moments over a single segment.
//!
//! For `0 <= a < b` and exponent `e` these compute
//! `J0 = ∫_a^b v^e dv` and `J1 = ∫_a^b v^e (v - a)/(b - a) dv`,
//! which is all that is needed to integrate a linear function against a
//! power kernel. Near segments use closed forms; segments far from the
//! singularity use 8-point Gauss–Legendre, which avoids the cancellation
//! of the closed forms there.

use std::sync::OnceLock;

use crate::quad::gauss_legendre_unit;

/// Segments with `a >= FAR_RATIO * (b - a)` use Gauss–Legendre.
const FAR_RATIO: f64 = 8.0;

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_unit(8))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Moments {
    pub j0: f64,
    pub j1: f64,
}

impl Moments {
    /// `∫ (fa + (fb - fa) w) v^e dv` where `w` runs from 0 at `a` to 1 at `b`.
    pub fn linear(&self, fa: f64, fb: f64) -> f64 {
        fa * (self.j0 - self.j1) + fb * self.j1
    }
}

pub(crate) fn moments(e: f64, a: f64, b: f64) -> Moments {
    debug_assert!(a >= 0.0 && b > a);
    let len = b - a;
    if a >= FAR_RATIO * len {
        let (x, w) = gl8();
        let (mut j0, mut j1) = (0.0, 0.0);
        for (&xi, &wi) in x.iter().zip(w) {
            let k = wi * (a + len * xi).powf(e);
            j0 += k;
            j1 += k * xi;
        }
        Moments { j0: j0 * len, j1: j1 * len }
    } else {
        let j0 = (pow_pos(b, e + 1.0) - pow_pos(a, e + 1.0)) / (e + 1.0);
        let j1 = ((pow_pos(b, e + 2.0) - pow_pos(a, e + 2.0)) / (e + 2.0) - a * j0) / len;
        Moments { j0, j1 }
    }
}

/// `x^p` with `0^p = 0` for positive `p`.
fn pow_pos(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        if p > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        x.powf(p)
    }
}

/// `∫_a^b |fa + (fb - fa) w| v^e dv`, splitting the segment at the zero of the
/// linear factor when it changes sign.
pub(crate) fn abs_linear_moment(e: f64, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    if fa * fb >= 0.0 {
        return moments(e, a, b).linear(fa, fb).abs();
    }
    let w = fa / (fa - fb);
    let mid = a + w * (b - a);
    let mut total = 0.0;
    if mid > a {
        total += moments(e, a, mid).linear(fa, 0.0).abs();
    }
    if b > mid {
        total += moments(e, mid, b).linear(0.0, fb).abs();
    }
    total
}

/// Moments on the uniform unit segments `[m - 1, m]` for `m = 1..=len`,
/// scaled by `step^(e + 1)` so that entry `m` describes `[(m-1)h, mh]`.
#[derive(Debug, Clone)]
pub(crate) struct UniformTable {
    pub j0: Vec<f64>,
    pub j1: Vec<f64>,
}

impl UniformTable {
    /// Entries for `m` from `first` to `last`; smaller indices are zero.
    pub fn new(e: f64, step: f64, first: usize, last: usize) -> Self {
        let scale = step.powf(e + 1.0);
        let mut j0 = vec![0.0; last + 1];
        let mut j1 = vec![0.0; last + 1];
        for m in first.max(1)..=last {
            let mo = moments(e, (m - 1) as f64, m as f64);
            j0[m] = mo.j0 * scale;
            j1[m] = mo.j1 * scale;
        }
        Self { j0, j1 }
    }

    pub fn at(&self, m: usize) -> Moments {
        Moments { j0: self.j0[m], j1: self.j1[m] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;

    fn oracle(e: f64, a: f64, b: f64) -> (f64, f64) {
        let j0 = integrate_adaptive(|v| v.powf(e), a, b, 1e-15, 1e-13).unwrap();
        let j1 = integrate_adaptive(|v| v.powf(e) * (v - a) / (b - a), a, b, 1e-15, 1e-13).unwrap();
        (j0, j1)
    }

    #[test]
    fn moments_match_adaptive_quadrature() {
        for &e in &[-1.7, -1.2, -0.5, -0.2, 0.3, 0.8, 1.5] {
            for &(a, b) in &[(0.5, 1.0), (3.0, 3.25), (20.0, 21.0), (1e3, 1e3 + 1.0)] {
                let m = moments(e, a, b);
                let (j0, j1) = oracle(e, a, b);
                assert!((m.j0 - j0).abs() <= 1e-11 * j0.abs(), "e={e} a={a}: {} vs {j0}", m.j0);
                assert!((m.j1 - j1).abs() <= 1e-10 * j1.abs(), "e={e} a={a}: {} vs {j1}", m.j1);
            }
        }
    }

    #[test]
    fn moments_from_zero() {
        let m = moments(-0.5, 0.0, 1.0);
        assert!((m.j0 - 2.0).abs() < 1e-14);
        assert!((m.j1 - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn abs_moment_splits_sign_change() {
        let v = abs_linear_moment(0.0, 0.0, 1.0, -1.0, 1.0);
        assert!((v - 0.5).abs() < 1e-15);
        let v = abs_linear_moment(-0.5, 1.0, 2.0, -1.0, 3.0);
        let expect = integrate_adaptive(|x| (-1.0 + 4.0 * (x - 1.0)).abs() / x.sqrt(), 1.0, 2.0, 1e-14, 1e-13).unwrap();
        assert!((v - expect).abs() < 1e-10, "{v} vs {expect}");
    }
}
