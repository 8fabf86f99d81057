//! Symmetric eigenvalues: Householder tridiagonalization with implicit QL,
//! Lanczos extremes, preconditioned spectra and outlier counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, DenseSymMatrix, LinearOperator};
use crate::preconditioners::Preconditioner;
use crate::symbols::GridSize;
use crate::toeplitz::{assemble_dense, CoeffOptions, ToeplitzCoeffs};

/// QL sweeps allowed per eigenvalue before giving up.
const QL_MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SpectrumReport {
    pub fn from_unsorted(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let lambda_min = eigenvalues.first().copied().unwrap_or(f64::NAN);
        let lambda_max = eigenvalues.last().copied().unwrap_or(f64::NAN);
        Self {
            eigenvalues,
            lambda_min,
            lambda_max,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutlierReport {
    pub n_out_left: usize,
    pub n_out_right: usize,
    pub percent: f64,
}

/// Reduces `a` to tridiagonal form `(diag, offdiag)`; `offdiag[k]` couples
/// `k` and `k + 1`.
pub fn tridiagonalize(a: &DenseSymMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.n();
    let mut m = a.clone().into_data();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        diag[k] = m[k * n + k];
        let lo = k + 1;
        let len = n - lo;
        // column k below the diagonal equals row k right of it
        let x = &m[k * n + lo..k * n + n];
        let sigma = norm2(x);
        if sigma == 0.0 || len == 1 {
            off[k] = if len == 1 { x[0] } else { 0.0 };
            continue;
        }
        let alpha = if x[0] > 0.0 { -sigma } else { sigma };
        // v = x - alpha e1, beta = 2 / vᵀv
        let v = &mut v[..len];
        v.copy_from_slice(x);
        v[0] -= alpha;
        let vtv = dot(v, v);
        let beta = 2.0 / vtv;
        off[k] = alpha;

        // p = beta B v, B the trailing block
        let w = &mut w[..len];
        for i in 0..len {
            let row = &m[(lo + i) * n + lo..(lo + i) * n + n];
            w[i] = beta * dot(row, v);
        }
        let kappa = 0.5 * beta * dot(w, v);
        for (wi, vi) in w.iter_mut().zip(v.iter()) {
            *wi -= kappa * vi;
        }
        // B -= v wᵀ + w vᵀ
        for i in 0..len {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut m[(lo + i) * n + lo..(lo + i) * n + n];
            for ((bij, &vj), &wj) in row.iter_mut().zip(v.iter()).zip(w.iter()) {
                *bij -= vi * wj + wi * vj;
            }
        }
    }
    if n > 0 {
        diag[n - 1] = m[(n - 1) * n + n - 1];
    }
    (diag, off)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts; returned ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if offdiag.len() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            got: offdiag.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::EigenNonConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

pub fn dense_sym_eigs(a: &DenseSymMatrix) -> Result<SpectrumReport> {
    let (d, e) = tridiagonalize(a);
    Ok(SpectrumReport::from_unsorted(tridiagonal_eigenvalues(&d, &e)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LanczosExtremes {
    pub lambda_min_est: f64,
    /// Ritz values approach the smallest eigenvalue from above.
    pub lambda_min_is_upper_estimate: bool,
    pub lambda_max_est: f64,
    pub steps: usize,
}

/// Ritz extremes after at most `iters` Lanczos steps with full
/// reorthogonalization, from a seeded random start vector.
pub fn lanczos_extremes<A: LinearOperator + ?Sized>(a: &A, iters: usize, seed: u64) -> Result<LanczosExtremes> {
    let n = a.dim();
    if n == 0 || iters == 0 {
        return Err(Error::InvalidSize {
            n,
            reason: "Lanczos needs a nonempty operator and at least one step".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|v| *v /= nq);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let steps = iters.min(n);
    for k in 0..steps {
        a.apply_into(&q, &mut w);
        let alpha = dot(&q, &w);
        alphas.push(alpha);
        basis.push(q.clone());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = norm2(&w);
        let scale = alphas.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        if k + 1 == steps || beta <= 1e-12 * scale {
            break;
        }
        betas.push(beta);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / beta;
        }
    }
    let ritz = tridiagonal_eigenvalues(&alphas, &betas)?;
    Ok(LanczosExtremes {
        lambda_min_est: ritz[0],
        lambda_min_is_upper_estimate: true,
        lambda_max_est: *ritz.last().expect("at least one Ritz value"),
        steps: alphas.len(),
    })
}

/// `n λ₁(A_n)` from the dense path.
pub fn min_eig_normalized(grid: GridSize, options: &CoeffOptions) -> Result<f64> {
    if grid.n() < 4 {
        return Err(Error::InvalidSize {
            n: grid.n(),
            reason: "normalized minimum eigenvalue needs n >= 4".into(),
        });
    }
    let coeffs = ToeplitzCoeffs::for_fn(grid, options)?;
    let spec = dense_sym_eigs(&assemble_dense(&coeffs))?;
    Ok(grid.n() as f64 * spec.lambda_min)
}

/// `P^{-1/2} A P^{-1/2}`, symmetrized.
pub fn preconditioned_matrix(a: &DenseSymMatrix, p: &Preconditioner) -> Result<DenseSymMatrix> {
    let n = a.n();
    crate::linalg::check_len(n, p.n())?;
    // rows of A P^{-1/2}
    let mut half = vec![0.0; n * n];
    for i in 0..n {
        let row = p.apply_inverse_sqrt(a.row(i))?;
        half[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    // P^{-1/2} (A P^{-1/2}) column by column, written as rows
    let mut col = vec![0.0; n];
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            col[i] = half[i * n + j];
        }
        let res = p.apply_inverse_sqrt(&col)?;
        for i in 0..n {
            out[i * n + j] = res[i];
        }
    }
    DenseSymMatrix::from_row_major_symmetrized(n, out)
}

/// Eigenvalues of `P⁻¹A` through the symmetric form `P^{-1/2} A P^{-1/2}`.
pub fn preconditioned_spectrum(a: &DenseSymMatrix, p: &Preconditioner) -> Result<SpectrumReport> {
    dense_sym_eigs(&preconditioned_matrix(a, p)?)
}

/// Eigenvalues outside the open interval `(1 - eps, 1 + eps)`.
pub fn count_outliers(s: &SpectrumReport, eps: f64) -> Result<OutlierReport> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let left = s.eigenvalues.iter().filter(|&&l| l <= 1.0 - eps).count();
    let right = s.eigenvalues.iter().filter(|&&l| l >= 1.0 + eps).count();
    let percent = if s.is_empty() {
        0.0
    } else {
        100.0 * (left + right) as f64 / s.len() as f64
    };
    Ok(OutlierReport {
        n_out_left: left,
        n_out_right: right,
        percent,
    })
}
