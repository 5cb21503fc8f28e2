//! Iterative radix-2 FFT, used for long-series autocorrelation.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// unused when another crate in the graph links std
#[allow(unused_imports)]
use num_traits::Float;

/// In-place forward transform; `buf.len()` must be a power of two.
pub(crate) fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    if n <= 1 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let half = len / 2;
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::new((ang * k as f64).cos(), (ang * k as f64).sin()))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half] * twiddles[k];
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// `Σ_t x_t·x_{t+lag}` for `lag = 0..=max_lag`, via zero-padded transforms.
pub(crate) fn lagged_products(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let size = (n + max_lag + 1).next_power_of_two();
    let mut buf: Vec<Complex64> = x
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(core::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    fft_in_place(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    // inverse via conjugation; the power spectrum is real so only scaling remains
    fft_in_place(&mut buf);
    let scale = 1.0 / size as f64;
    buf.iter().take(max_lag + 1).map(|v| v.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sums() {
        let x: Vec<f64> = (0..37).map(|i| ((i * 7 % 11) as f64 - 5.0) * 0.3).collect();
        let got = lagged_products(&x, 10);
        for lag in 0..=10 {
            let direct: f64 = (0..x.len() - lag).map(|t| x[t] * x[t + lag]).sum();
            assert!((got[lag] - direct).abs() < 1e-9, "lag {lag}");
        }
    }
}
