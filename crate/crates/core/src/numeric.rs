/// `|v|^p` with exact fast paths for `p = 1` and `p = 2`.
#[inline]
pub(crate) fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

/// Linear convolution `c[i] = Σ_k a[k] b[i - k]`, truncated to `a.len()` entries.
pub(crate) fn convolve_truncated(a: &[f64], b: &[f64]) -> Vec<f64> {
    use rustfft::{num_complex::Complex, FftPlanner};
    let len = (a.len() + b.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(len);
    let lift = |v: &[f64]| {
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(len, Complex::new(0.0, 0.0));
        forward.process(&mut buf);
        buf
    };
    let mut fa = lift(a);
    let fb = lift(b);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    planner.plan_fft_inverse(len).process(&mut fa);
    fa.iter().take(a.len()).map(|c| c.re / len as f64).collect()
}
