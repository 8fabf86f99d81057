//! Fourier coefficients of even symbols, dense assembly of `T_n(f)` and the
//! `O(n log n)` Toeplitz product through circulant embedding.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{check_len, DenseSymMatrix, LinearOperator};
use crate::quadrature::{integrate_breakpoints, Integrator};
use crate::symbols::{FnSymbol, GridSize, Symbol};
use crate::transforms::Fft;

/// Sampling controls for [`coeffs_via_fft`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffOptions {
    /// Initial number of samples on `[0, 2π)`; a power of two `≥ 4n`.
    /// `None` picks [`default_initial_samples`].
    pub initial_samples: Option<usize>,
    /// Max-norm change between doublings that counts as converged.
    pub stabilization_tol: f64,
    pub max_doublings: u32,
    /// Compare Richardson-extrapolated estimates `(4 T_{2N} - T_N) / 3`
    /// instead of raw samplings. The even periodic extension of `f_n` has a
    /// slope jump at `θ = π`, which leaves an `O(N⁻²)` aliasing error in the
    /// raw coefficients.
    pub extrapolate: bool,
}

impl Default for CoeffOptions {
    fn default() -> Self {
        Self {
            initial_samples: None,
            stabilization_tol: 1e-10,
            max_doublings: 4,
            extrapolate: true,
        }
    }
}

/// `64n` rounded up to a power of two, at least `2^14`.
pub fn default_initial_samples(n: usize) -> usize {
    (64 * n).next_power_of_two().max(1 << 14)
}

/// First column `a_0, …, a_{n-1}` of a real symmetric Toeplitz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzCoeffs {
    a: Vec<f64>,
}

impl ToeplitzCoeffs {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidSize {
                n: 0,
                reason: "Toeplitz matrix needs at least one coefficient".into(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite Toeplitz coefficient".into()));
        }
        Ok(Self { a })
    }

    /// Coefficients of `A_n = T_n(f_n)`.
    pub fn for_fn(grid: GridSize, options: &CoeffOptions) -> Result<Self> {
        coeffs_via_fft(&FnSymbol { grid }, grid.n(), options)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// `a_k`, zero outside `0..n`.
    pub fn get(&self, k: usize) -> f64 {
        self.a.get(k).copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            a: self.a.iter().map(|v| v * alpha).collect(),
        }
    }
}

fn sampled_coefficients<S: Symbol + ?Sized>(symbol: &S, n: usize, samples: usize) -> Result<Vec<f64>> {
    let fft = Fft::new(samples);
    let mut data = vec![Complex64::default(); samples];
    let step = 2.0 * PI / samples as f64;
    for m in 0..=samples / 2 {
        let v = Complex64::new(symbol.eval(m as f64 * step), 0.0);
        data[m] = v;
        if m > 0 && m < samples - m {
            data[samples - m] = v;
        }
    }
    fft.forward_in_place(&mut data);
    let scale = 1.0 / samples as f64;
    let coeffs: Vec<f64> = data[..n].iter().map(|v| v.re * scale).collect();
    let largest = coeffs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let worst_imag = data[..n].iter().fold(0.0f64, |m, v| m.max((v.im * scale).abs()));
    if worst_imag > 1e-12 * largest {
        return Err(Error::Domain(format!(
            "symbol is not even: imaginary coefficient part {worst_imag:e}"
        )));
    }
    Ok(coeffs)
}

/// Cosine coefficients of an even symbol from uniform samples and an FFT.
/// The sample count doubles until two successive estimates agree to
/// `stabilization_tol` in the max norm.
pub fn coeffs_via_fft<S: Symbol + ?Sized>(symbol: &S, n: usize, options: &CoeffOptions) -> Result<ToeplitzCoeffs> {
    if n == 0 {
        return Err(Error::InvalidSize {
            n,
            reason: "need at least one coefficient".into(),
        });
    }
    let mut samples = options.initial_samples.unwrap_or_else(|| default_initial_samples(n));
    if !samples.is_power_of_two() || samples < 4 * n {
        return Err(Error::InvalidSize {
            n: samples,
            reason: format!("sample count must be a power of two >= 4n = {}", 4 * n),
        });
    }
    let mut raw = sampled_coefficients(symbol, n, samples)?;
    let mut estimate: Option<Vec<f64>> = (!options.extrapolate).then(|| raw.clone());
    let mut change = f64::INFINITY;
    for _ in 0..options.max_doublings {
        samples *= 2;
        let finer = sampled_coefficients(symbol, n, samples)?;
        let next: Vec<f64> = if options.extrapolate {
            raw.iter().zip(&finer).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
        } else {
            finer.clone()
        };
        raw = finer;
        if let Some(prev) = &estimate {
            change = prev
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if change < options.stabilization_tol {
                return ToeplitzCoeffs::new(next);
            }
        }
        estimate = Some(next);
    }
    Err(Error::NotStabilized {
        doublings: options.max_doublings,
        change,
    })
}

/// `(1/π) ∫_0^π f_n(θ) cos(kθ) dθ` by adaptive quadrature.
pub fn coeff_oracle(grid: GridSize, k: usize, tol: f64) -> Result<f64> {
    symbol_coeff_oracle(&FnSymbol { grid }, grid.n(), k, tol)
}

/// Quadrature oracle for the `k`-th cosine coefficient of any even symbol.
pub fn symbol_coeff_oracle<S: Symbol + ?Sized>(symbol: &S, n: usize, k: usize, tol: f64) -> Result<f64> {
    if k >= n {
        return Err(Error::Domain(format!("coefficient index {k} must be below n = {n}")));
    }
    let pieces = k + 1;
    let breaks: Vec<f64> = (0..=pieces).map(|i| PI * i as f64 / pieces as f64).collect();
    let kf = k as f64;
    let r = integrate_breakpoints(&Integrator::new(tol * PI), |t| symbol.eval(t) * (kf * t).cos(), &breaks)?;
    Ok(r.value / PI)
}

/// Dense `T_n`: entry `(i, j)` is `a_{|i-j|}`.
pub fn assemble_dense(c: &ToeplitzCoeffs) -> DenseSymMatrix {
    DenseSymMatrix::from_fn(c.n(), |i, j| c.a[i.abs_diff(j)])
}

/// Toeplitz product through a circulant embedding of length `2^⌈log₂ 2n⌉`.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    coeffs: ToeplitzCoeffs,
    fft: Fft,
    eigenvalues: Vec<Complex64>,
}

impl ToeplitzOperator {
    pub fn new(coeffs: ToeplitzCoeffs) -> Self {
        let n = coeffs.n();
        let len = (2 * n).next_power_of_two();
        let fft = Fft::new(len);
        let mut column = vec![Complex64::default(); len];
        for (k, &a) in coeffs.a.iter().enumerate() {
            column[k] = Complex64::new(a, 0.0);
            if k > 0 {
                column[len - k] = Complex64::new(a, 0.0);
            }
        }
        fft.forward_in_place(&mut column);
        Self {
            coeffs,
            fft,
            eigenvalues: column,
        }
    }

    pub fn coeffs(&self) -> &ToeplitzCoeffs {
        &self.coeffs
    }
}

impl LinearOperator for ToeplitzOperator {
    fn dim(&self) -> usize {
        self.coeffs.n()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.coeffs.n();
        let mut buf = vec![Complex64::default(); self.fft.len()];
        for (b, &v) in buf.iter_mut().zip(x) {
            *b = Complex64::new(v, 0.0);
        }
        self.fft.forward_in_place(&mut buf);
        for (b, e) in buf.iter_mut().zip(&self.eigenvalues) {
            *b *= e;
        }
        self.fft.inverse_in_place(&mut buf);
        for (yi, b) in y.iter_mut().zip(&buf[..n]) {
            *yi = b.re;
        }
    }
}

pub fn toeplitz_matvec(c: &ToeplitzCoeffs, x: &[f64]) -> Result<Vec<f64>> {
    check_len(c.n(), x.len())?;
    Ok(ToeplitzOperator::new(c.clone()).apply(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{CosineSymbol, LaplacianSymbol};

    #[test]
    fn laplacian_symbol_coefficients() {
        let c = coeffs_via_fft(&LaplacianSymbol, 6, &CoeffOptions::default()).unwrap();
        let expected = [2.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        for (a, e) in c.as_slice().iter().zip(expected) {
            assert!((a - e).abs() < 1e-14, "{:?}", c.as_slice());
        }
        let k1 = symbol_coeff_oracle(&LaplacianSymbol, 4, 1, 1e-12).unwrap();
        assert!((k1 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sample_count_is_validated() {
        let opts = CoeffOptions {
            initial_samples: Some(24),
            ..Default::default()
        };
        assert!(coeffs_via_fft(&LaplacianSymbol, 4, &opts).is_err());
        let opts = CoeffOptions {
            initial_samples: Some(8),
            ..Default::default()
        };
        assert!(coeffs_via_fft(&LaplacianSymbol, 4, &opts).is_err());
    }

    #[test]
    fn non_stabilization_is_reported() {
        let opts = CoeffOptions {
            initial_samples: Some(64),
            stabilization_tol: 1e-15,
            max_doublings: 1,
            extrapolate: true,
        };
        let grid = GridSize::new(16).unwrap();
        assert!(matches!(
            ToeplitzCoeffs::for_fn(grid, &opts),
            Err(Error::NotStabilized { doublings: 1, .. })
        ));
    }

    #[test]
    fn dense_assembly() {
        let c = ToeplitzCoeffs::new(vec![3.0]).unwrap();
        assert_eq!(assemble_dense(&c).get(0, 0), 3.0);
        let c = ToeplitzCoeffs::new(vec![2.0, -1.0, 0.0]).unwrap();
        let m = assemble_dense(&c);
        assert_eq!(m.row(0), &[2.0, -1.0, 0.0]);
        assert_eq!(m.row(1), &[-1.0, 2.0, -1.0]);
        assert_eq!(m.row(2), &[0.0, -1.0, 2.0]);
    }

    #[test]
    fn fast_product_special_vectors() {
        let c = ToeplitzCoeffs::new(vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let y = toeplitz_matvec(&c, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        for (a, e) in y.iter().zip([4.0, 3.0, 2.0, 1.0]) {
            assert!((a - e).abs() < 1e-14);
        }
        let mut lap = vec![0.0; 10];
        lap[0] = 2.0;
        lap[1] = -1.0;
        let y = toeplitz_matvec(&ToeplitzCoeffs::new(lap).unwrap(), &[1.0; 10]).unwrap();
        for (i, v) in y.iter().enumerate() {
            let e = if i == 0 || i == 9 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-14);
        }
        assert!(matches!(toeplitz_matvec(&c, &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn cosine_symbol_round_trip() {
        let coeffs = vec![5.0, 1.5, -0.25, 0.125, 0.0];
        let sym = CosineSymbol { coeffs: coeffs.clone() };
        let c = coeffs_via_fft(&sym, 5, &CoeffOptions::default()).unwrap();
        for (a, e) in c.as_slice().iter().zip(&coeffs) {
            assert!((a - e).abs() < 1e-13);
        }
    }
}
