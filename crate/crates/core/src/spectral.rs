//! FFT helpers for periodic samples.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Derivative in `θ` of samples `f(2πj/n)` of a smooth `2π`-periodic function.
pub fn periodic_derivative(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = f.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
        // the Nyquist mode has no well-defined derivative
        let m = if n.is_multiple_of(2) && j == n / 2 { 0 } else { m };
        *c *= Complex64::new(0.0, m as f64 / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Forward 2D FFT of an `n×n` row-major grid, normalized so that entry `m` is the
/// Fourier coefficient of `e^{2πi(m₁s₁+m₂s₂)}` (indices wrap).
pub fn fft2(grid: &[Complex64], n: usize) -> Vec<Complex64> {
    transform2(grid, n, false)
}

/// Inverse of [`fft2`]: samples from coefficients.
pub fn ifft2(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    transform2(coeffs, n, true)
}

fn transform2(data: &[Complex64], n: usize, inverse: bool) -> Vec<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut buf = data.to_vec();
    for row in buf.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = buf[r * n + c];
        }
        fft.process(&mut col);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
    if !inverse {
        let s = 1.0 / (n * n) as f64;
        buf.iter_mut().for_each(|x| *x *= s);
    }
    buf
}

/// Storage index of the wrapped frequency `m` on an `n`-point axis.
pub fn wrap(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_exponential() {
        let n = 32;
        let f: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, 3.0 * 2.0 * PI * j as f64 / n as f64)).collect();
        let d = periodic_derivative(&f);
        for j in 0..n {
            assert!((d[j] - Complex64::new(0.0, 3.0) * f[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn fft2_roundtrip_and_normalization() {
        let n = 8;
        let g: Vec<Complex64> = (0..n * n)
            .map(|i| {
                let (a, b) = ((i / n) as f64 / n as f64, (i % n) as f64 / n as f64);
                Complex64::from_polar(2.0, 2.0 * PI * (-a + 2.0 * b))
            })
            .collect();
        let c = fft2(&g, n);
        assert!((c[wrap(-1, n) * n + wrap(2, n)] - 2.0).norm() < 1e-12);
        let back = ifft2(&c, n);
        assert!(back.iter().zip(&g).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}
