//! Fractional Gaussian noise: exact circulant embedding with a Cholesky
//! fallback when the embedding has negative eigenvalues.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Largest number of increments the O(n^3) Cholesky fallback accepts.
pub const CHOLESKY_MAX_INCREMENTS: usize = 4096;

/// Eigenvalues below this are treated as an embedding failure.
const EIGEN_FLOOR: f64 = -1e-10;

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let two_h = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// `n` increments of fBm on a grid of spacing `step`.
pub(crate) fn fgn(hurst: f64, n: usize, step: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let eigen = circulant_eigenvalues(hurst, n);
    let noise = if eigen.iter().all(|&l| l >= EIGEN_FLOOR) {
        synthesize(&eigen, n, rng)
    } else if n <= CHOLESKY_MAX_INCREMENTS {
        fgn_cholesky(hurst, n, rng)?
    } else {
        return Err(Error::Numeric(format!(
            "circulant embedding not nonnegative and {n} increments exceed the Cholesky limit"
        )));
    };
    let scale = step.powf(hurst);
    Ok(noise.into_iter().map(|z| z * scale).collect())
}

/// Unit-step fGn via circulant embedding; errors if the embedding is not
/// nonnegative definite.
pub fn fgn_circulant(hurst: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let eigen = circulant_eigenvalues(hurst, n);
    if let Some(min) = eigen.iter().copied().reduce(f64::min).filter(|&m| m < EIGEN_FLOOR) {
        return Err(Error::Numeric(format!("circulant embedding has eigenvalue {min:e}")));
    }
    Ok(synthesize(&eigen, n, rng))
}

/// Unit-step fGn via Cholesky factorization of the full Toeplitz covariance.
pub fn fgn_cholesky(hurst: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if n > CHOLESKY_MAX_INCREMENTS {
        return Err(Error::Size(format!(
            "Cholesky synthesis limited to {CHOLESKY_MAX_INCREMENTS} increments, got {n}"
        )));
    }
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(hurst, k)).collect();
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Numeric("fGn covariance is not positive definite".into()))?;
    let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
    Ok((chol.l() * z).iter().copied().collect())
}

fn circulant_eigenvalues(hurst: f64, n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex::new(fgn_autocovariance(hurst, k), 0.0));
    }
    for k in (1..n).rev() {
        row.push(Complex::new(fgn_autocovariance(hurst, k), 0.0));
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut row);
    row.into_iter().map(|c| c.re).collect()
}

fn synthesize(eigen: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = eigen.len();
    let mut buf: Vec<Complex<f64>> = eigen
        .iter()
        .map(|&l| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            Complex::new(a, b) * (l.max(0.0) / m as f64).sqrt()
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf[..n].iter().map(|c| c.re).collect()
}
