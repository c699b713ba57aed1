//! Independent reference computations used only by unit tests.

use std::f64::consts::PI;

/// One-sided power spectrum `|X_k|^2`, `k = 0..=n/2`, by direct summation.
pub fn naive_dft_power(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                // Reduce the phase index mod n to keep the angle small and exact.
                let a = -2.0 * PI * ((k * i) % n) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            re * re + im * im
        })
        .collect()
}
