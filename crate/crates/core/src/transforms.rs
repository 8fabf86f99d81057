//! Complex FFT (forward unnormalized, inverse scaled by `1/N`) and the
//! orthonormal type-I discrete sine transform.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft as FftKernel, FftPlanner};

/// A planned FFT pair of fixed length. Plans are immutable and `Send + Sync`.
#[derive(Clone)]
pub struct Fft {
    len: usize,
    forward: Arc<dyn FftKernel<f64>>,
    inverse: Arc<dyn FftKernel<f64>>,
}

impl fmt::Debug for Fft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft").field("len", &self.len).finish()
    }
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "FFT length must be positive");
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `X_k = Σ_j x_j e^{-2πi jk/N}`, in place.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len);
        self.forward.process(data);
    }

    /// Inverse of [`Fft::forward_in_place`], including the `1/N` factor.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len);
        self.inverse.process(data);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

pub fn fft_forward(x: &[Complex64]) -> Vec<Complex64> {
    let mut out = x.to_vec();
    Fft::new(x.len()).forward_in_place(&mut out);
    out
}

pub fn fft_inverse(x: &[Complex64]) -> Vec<Complex64> {
    let mut out = x.to_vec();
    Fft::new(x.len()).inverse_in_place(&mut out);
    out
}

/// Orthonormal DST-I of length `n`: `(Qx)_j = √(2/(n+1)) Σ_k x_k sin(jkπ/(n+1))`.
///
/// Computed from an odd extension of length `2(n+1)`. `Q` is symmetric and
/// its own inverse.
#[derive(Clone, Debug)]
pub struct Dst1 {
    n: usize,
    fft: Fft,
    scale: f64,
}

impl Dst1 {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "DST length must be positive");
        Self {
            n,
            fft: Fft::new(2 * (n + 1)),
            scale: (2.0 / (n as f64 + 1.0)).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        let mut scratch = vec![Complex64::default(); 2 * (self.n + 1)];
        self.apply_into(x, &mut out, &mut scratch);
        out
    }

    /// Allocation-free variant; `scratch` must hold `2(n+1)` entries.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64], scratch: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        let m = 2 * (n + 1);
        assert_eq!(scratch.len(), m);
        scratch[0] = Complex64::default();
        scratch[n + 1] = Complex64::default();
        for (k, &v) in x.iter().enumerate() {
            scratch[k + 1] = Complex64::new(v, 0.0);
            scratch[m - k - 1] = Complex64::new(-v, 0.0);
        }
        self.fft.forward_in_place(scratch);
        // Y_j = -2i Σ_k x_k sin(jkπ/(n+1))
        let factor = -0.5 * self.scale;
        for j in 0..n {
            out[j] = factor * scratch[j + 1].im;
        }
    }
}

pub fn dst1(x: &[f64]) -> Vec<f64> {
    Dst1::new(x.len()).apply(x)
}

/// Dense `Q` for tests and oracles.
pub fn dst1_matrix(n: usize) -> Vec<Vec<f64>> {
    let scale = (2.0 / (n as f64 + 1.0)).sqrt();
    (1..=n)
        .map(|j| {
            (1..=n)
                .map(|k| scale * ((j * k) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let angle = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, angle)
                    })
                    .sum()
            })
            .collect()
    }

    fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn delta_and_constant() {
        let y = fft_forward(&[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(y.iter().all(|v| (v - c(1.0)).norm() < 1e-15));
        let y = fft_forward(&[c(1.0); 4]);
        assert!((y[0] - c(4.0)).norm() < 1e-15);
        assert!(y[1..].iter().all(|v| v.norm() < 1e-15));
        let back = fft_inverse(&[c(4.0), c(0.0), c(0.0), c(0.0)]);
        assert!(back.iter().all(|v| (v - c(1.0)).norm() < 1e-15));
        assert_eq!(fft_forward(&[c(3.5)]), vec![c(3.5)]);
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [16, 15, 24] {
            let x = random_complex(&mut rng, n);
            let fast = fft_forward(&x);
            let slow = naive_dft(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trips() {
        let x: Vec<Complex64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&v| c(v)).collect();
        let back = fft_inverse(&fft_forward(&x));
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_complex(&mut rng, 24);
        let back = fft_inverse(&fft_forward(&x));
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_complex(&mut rng, 64);
        let y = fft_forward(&x);
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((ey - 64.0 * ex).abs() < 1e-10 * ey);
    }

    #[test]
    fn dst_of_length_one_is_identity() {
        assert!((dst1(&[2.5])[0] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn dst_matches_dense_matrix_and_is_involutory() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = dst1_matrix(5);
        let dense: Vec<f64> = q.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let fast = dst1(&x);
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-13);
        }
        let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let twice = dst1(&dst1(&x));
        for (a, b) in twice.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
        let norm_x: f64 = x.iter().map(|v| v * v).sum();
        let norm_y: f64 = dst1(&x).iter().map(|v| v * v).sum();
        assert!((norm_x - norm_y).abs() < 1e-12);
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let lhs = dst1(&combo);
        let (tx, ty) = (dst1(&x), dst1(&y));
        for i in 0..12 {
            assert!((lhs[i] - (2.0 * tx[i] - 3.0 * ty[i])).abs() < 1e-13);
        }
    }
}
