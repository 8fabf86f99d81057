//! Circulant, tau and Laplacian preconditioners, each diagonalized by a fast
//! transform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, DenseSymMatrix, LinearOperator};
use crate::toeplitz::{ToeplitzCoeffs, ToeplitzOperator};
use crate::transforms::{Dst1, Fft};

/// Transform-domain eigenvalues at or below `SPD_RELATIVE_FLOOR · max|λ|`
/// are treated as nonpositive. A singular circulant evaluates its zero
/// eigenvalue to roundoff of either sign.
pub const SPD_RELATIVE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrecKind {
    Identity,
    StrangCirculant,
    FrobeniusCirculant,
    NaturalTau,
    FrobeniusTau,
    Laplacian,
}

impl PrecKind {
    pub const ALL: [PrecKind; 6] = [
        PrecKind::Identity,
        PrecKind::StrangCirculant,
        PrecKind::FrobeniusCirculant,
        PrecKind::NaturalTau,
        PrecKind::FrobeniusTau,
        PrecKind::Laplacian,
    ];

    /// Short tag used on the command line and in CSV headers.
    pub fn label(self) -> &'static str {
        match self {
            PrecKind::Identity => "I",
            PrecKind::StrangCirculant => "CS",
            PrecKind::FrobeniusCirculant => "CF",
            PrecKind::NaturalTau => "TN",
            PrecKind::FrobeniusTau => "TF",
            PrecKind::Laplacian => "L",
        }
    }
}

impl fmt::Display for PrecKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PrecKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "i" | "identity" | "none" => PrecKind::Identity,
            "cs" | "strang" => PrecKind::StrangCirculant,
            "cf" | "frobenius-circulant" => PrecKind::FrobeniusCirculant,
            "tn" | "natural-tau" => PrecKind::NaturalTau,
            "tf" | "frobenius-tau" => PrecKind::FrobeniusTau,
            "l" | "laplacian" => PrecKind::Laplacian,
            _ => return Err(Error::Domain(format!("unknown preconditioner '{s}'"))),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone)]
enum Transform {
    Identity,
    Circulant(Fft),
    Tau(Dst1),
}

/// SPD matrix `U diag(λ) U*` with `U` the DFT or the DST-I.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    kind: PrecKind,
    n: usize,
    spectrum: Vec<f64>,
    transform: Transform,
}

impl Preconditioner {
    pub fn identity(n: usize) -> Self {
        Self {
            kind: PrecKind::Identity,
            n,
            spectrum: Vec::new(),
            transform: Transform::Identity,
        }
    }

    fn checked(kind: PrecKind, spectrum: Vec<f64>, transform: Transform) -> Result<Self> {
        let largest = spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let smallest = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        if !(smallest > SPD_RELATIVE_FLOOR * largest) {
            return Err(Error::NotSpd {
                kind,
                min_eigenvalue: smallest,
            });
        }
        Ok(Self {
            kind,
            n: spectrum.len(),
            spectrum,
            transform,
        })
    }

    pub fn kind(&self) -> PrecKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Transform-domain eigenvalues: DFT order for circulants, `j = 1..n` for
    /// tau matrices. Empty for the identity.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    fn spectral_apply(&self, x: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        match &self.transform {
            Transform::Identity => Ok(x.to_vec()),
            Transform::Circulant(fft) => {
                let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft.forward_in_place(&mut buf);
                for (b, &l) in buf.iter_mut().zip(&self.spectrum) {
                    *b *= f(l);
                }
                fft.inverse_in_place(&mut buf);
                Ok(buf.iter().map(|v| v.re).collect())
            }
            Transform::Tau(dst) => {
                let mut scratch = vec![Complex64::default(); 2 * (self.n + 1)];
                let mut y = vec![0.0; self.n];
                dst.apply_into(x, &mut y, &mut scratch);
                for (v, &l) in y.iter_mut().zip(&self.spectrum) {
                    *v *= f(l);
                }
                let mut out = vec![0.0; self.n];
                dst.apply_into(&y, &mut out, &mut scratch);
                Ok(out)
            }
        }
    }

    /// `P x`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.spectral_apply(x, |l| l)
    }

    /// `P⁻¹ x`; the Laplacian uses the Thomas algorithm.
    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.kind == PrecKind::Laplacian {
            check_len(self.n, x.len())?;
            return Ok(thomas_laplacian(x));
        }
        self.spectral_apply(x, |l| 1.0 / l)
    }

    /// `P⁻¹ x` through the transform even for the Laplacian.
    pub fn apply_inverse_spectral(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.spectral_apply(x, |l| 1.0 / l)
    }

    /// `P^{-1/2} x` with the symmetric square root.
    pub fn apply_inverse_sqrt(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.spectral_apply(x, |l| 1.0 / l.sqrt())
    }

    pub fn to_dense(&self) -> DenseSymMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e).expect("length matches");
            for i in 0..n {
                data[i * n + j] = col[i];
            }
            e[j] = 0.0;
        }
        DenseSymMatrix::from_row_major_symmetrized(n, data).expect("square buffer")
    }
}

fn require_order(kind: PrecKind, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidSize {
            n,
            reason: format!("{kind} preconditioner needs n >= {min}"),
        });
    }
    Ok(())
}

fn circulant_from_column(kind: PrecKind, column: &[f64]) -> Result<Preconditioner> {
    let fft = Fft::new(column.len());
    let mut buf: Vec<Complex64> = column.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward_in_place(&mut buf);
    // symmetric first column, so the DFT is real up to roundoff
    let spectrum = buf.iter().map(|v| v.re).collect();
    Preconditioner::checked(kind, spectrum, Transform::Circulant(fft))
}

/// First column of the Strang circulant.
pub fn strang_column(c: &ToeplitzCoeffs) -> Vec<f64> {
    let n = c.n();
    (0..n).map(|j| if j <= n / 2 { c.get(j) } else { c.get(n - j) }).collect()
}

/// First column of the Frobenius-optimal circulant.
pub fn frobenius_circulant_column(c: &ToeplitzCoeffs) -> Vec<f64> {
    let n = c.n();
    let nf = n as f64;
    (0..n)
        .map(|j| {
            let wrap = if j == 0 { 0.0 } else { c.get(n - j) };
            ((n - j) as f64 * c.get(j) + j as f64 * wrap) / nf
        })
        .collect()
}

pub fn build_strang(c: &ToeplitzCoeffs) -> Result<Preconditioner> {
    require_order(PrecKind::StrangCirculant, c.n(), 2)?;
    circulant_from_column(PrecKind::StrangCirculant, &strang_column(c))
}

pub fn build_frobenius_circulant(c: &ToeplitzCoeffs) -> Result<Preconditioner> {
    require_order(PrecKind::FrobeniusCirculant, c.n(), 2)?;
    circulant_from_column(PrecKind::FrobeniusCirculant, &frobenius_circulant_column(c))
}

/// `d_j = a_0 + 2 Σ_{k≥1} a_k cos(jkπ/(n+1))`, `j = 1..n`.
pub fn natural_tau_eigenvalues(c: &ToeplitzCoeffs) -> Vec<f64> {
    let n = c.n();
    let fft = Fft::new(2 * (n + 1));
    let mut buf = vec![Complex64::default(); 2 * (n + 1)];
    for (b, &a) in buf.iter_mut().zip(c.as_slice()) {
        *b = Complex64::new(a, 0.0);
    }
    fft.forward_in_place(&mut buf);
    let a0 = c.get(0);
    (1..=n).map(|j| 2.0 * buf[j].re - a0).collect()
}

pub fn build_natural_tau(c: &ToeplitzCoeffs) -> Result<Preconditioner> {
    require_order(PrecKind::NaturalTau, c.n(), 1)?;
    Preconditioner::checked(
        PrecKind::NaturalTau,
        natural_tau_eigenvalues(c),
        Transform::Tau(Dst1::new(c.n())),
    )
}

/// `diag(Q A Q)` from `2n` sine transforms.
pub fn frobenius_tau_eigenvalues(a: &DenseSymMatrix) -> Vec<f64> {
    let n = a.n();
    let dst = Dst1::new(n);
    let mut scratch = vec![Complex64::default(); 2 * (n + 1)];
    // rows of A Q (A and Q symmetric), stored transposed so columns are contiguous
    let mut aq_t = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for i in 0..n {
        dst.apply_into(a.row(i), &mut row, &mut scratch);
        for (j, &v) in row.iter().enumerate() {
            aq_t[j * n + i] = v;
        }
    }
    (0..n)
        .map(|j| {
            dst.apply_into(&aq_t[j * n..(j + 1) * n], &mut row, &mut scratch);
            row[j]
        })
        .collect()
}

/// `diag(Q T Q)` from `n` fast Toeplitz products.
pub fn frobenius_tau_eigenvalues_toeplitz(op: &ToeplitzOperator) -> Vec<f64> {
    let n = op.dim();
    let scale = (2.0 / (n as f64 + 1.0)).sqrt();
    let mut q = vec![0.0; n];
    let mut tq = vec![0.0; n];
    (1..=n)
        .map(|j| {
            for (k, v) in q.iter_mut().enumerate() {
                *v = scale * ((j * (k + 1)) as f64 * PI / (n as f64 + 1.0)).sin();
            }
            op.apply_into(&q, &mut tq);
            crate::linalg::dot(&q, &tq)
        })
        .collect()
}

pub fn build_frobenius_tau(a: &DenseSymMatrix) -> Result<Preconditioner> {
    require_order(PrecKind::FrobeniusTau, a.n(), 1)?;
    Preconditioner::checked(
        PrecKind::FrobeniusTau,
        frobenius_tau_eigenvalues(a),
        Transform::Tau(Dst1::new(a.n())),
    )
}

pub fn build_frobenius_tau_toeplitz(c: &ToeplitzCoeffs) -> Result<Preconditioner> {
    require_order(PrecKind::FrobeniusTau, c.n(), 1)?;
    let op = ToeplitzOperator::new(c.clone());
    Preconditioner::checked(
        PrecKind::FrobeniusTau,
        frobenius_tau_eigenvalues_toeplitz(&op),
        Transform::Tau(Dst1::new(c.n())),
    )
}

/// `tridiag(-1, 2, -1)`, eigenvalues `2 - 2cos(jπ/(n+1))`.
pub fn build_laplacian(n: usize) -> Result<Preconditioner> {
    require_order(PrecKind::Laplacian, n, 1)?;
    let spectrum = (1..=n)
        .map(|j| {
            let half = 0.5 * j as f64 * PI / (n as f64 + 1.0);
            4.0 * half.sin().powi(2)
        })
        .collect();
    Preconditioner::checked(PrecKind::Laplacian, spectrum, Transform::Tau(Dst1::new(n)))
}

/// Dispatches on `kind`. The Laplacian ignores the coefficients beyond `n`.
pub fn build(kind: PrecKind, c: &ToeplitzCoeffs) -> Result<Preconditioner> {
    match kind {
        PrecKind::Identity => Ok(Preconditioner::identity(c.n())),
        PrecKind::StrangCirculant => build_strang(c),
        PrecKind::FrobeniusCirculant => build_frobenius_circulant(c),
        PrecKind::NaturalTau => build_natural_tau(c),
        PrecKind::FrobeniusTau => build_frobenius_tau_toeplitz(c),
        PrecKind::Laplacian => build_laplacian(c.n()),
    }
}

/// Solves `tridiag(-1, 2, -1) x = b`.
pub fn thomas_laplacian(b: &[f64]) -> Vec<f64> {
    let n = b.len();
    if n == 0 {
        return Vec::new();
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    c_prime[0] = -0.5;
    d_prime[0] = 0.5 * b[0];
    for i in 1..n {
        let denom = 2.0 + c_prime[i - 1];
        c_prime[i] = -1.0 / denom;
        d_prime[i] = (b[i] + d_prime[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::assemble_dense;

    fn lap_coeffs(n: usize) -> ToeplitzCoeffs {
        let mut a = vec![0.0; n];
        a[0] = 2.0;
        if n > 1 {
            a[1] = -1.0;
        }
        ToeplitzCoeffs::new(a).unwrap()
    }

    #[test]
    fn strang_of_laplacian_is_singular() {
        let c = lap_coeffs(4);
        assert_eq!(strang_column(&c), vec![2.0, -1.0, 0.0, -1.0]);
        match build_strang(&c) {
            Err(Error::NotSpd { kind, min_eigenvalue }) => {
                assert_eq!(kind, PrecKind::StrangCirculant);
                assert!(min_eigenvalue.abs() < 1e-14);
            }
            other => panic!("expected NotSpd, got {other:?}"),
        }
    }

    #[test]
    fn frobenius_circulant_order_two() {
        let c = ToeplitzCoeffs::new(vec![2.0, -1.0]).unwrap();
        assert_eq!(frobenius_circulant_column(&c), vec![2.0, -1.0]);
    }

    #[test]
    fn natural_tau_of_laplacian_is_laplacian() {
        let n = 7;
        let p = build_natural_tau(&lap_coeffs(n)).unwrap();
        let lap = build_laplacian(n).unwrap();
        for (a, b) in p.spectrum().iter().zip(lap.spectrum()) {
            assert!((a - b).abs() < 1e-14);
        }
        let dense = p.to_dense();
        assert!(dense.max_abs_diff(&assemble_dense(&lap_coeffs(n))) < 1e-14);
    }

    #[test]
    fn natural_tau_order_two() {
        let c = ToeplitzCoeffs::new(vec![3.0, 0.5]).unwrap();
        let d = natural_tau_eigenvalues(&c);
        assert!((d[0] - 3.5).abs() < 1e-14 && (d[1] - 2.5).abs() < 1e-14);
        let p = build_natural_tau(&c).unwrap();
        assert!(p.to_dense().max_abs_diff(&assemble_dense(&c)) < 1e-14);
    }

    #[test]
    fn frobenius_tau_fixes_laplacian() {
        let n = 9;
        let a = assemble_dense(&lap_coeffs(n));
        let p = build_frobenius_tau(&a).unwrap();
        assert!(p.to_dense().max_abs_diff(&a) < 1e-13);
        let q = build_frobenius_tau_toeplitz(&lap_coeffs(n)).unwrap();
        for (x, y) in p.spectrum().iter().zip(q.spectrum()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_inverse() {
        let p = build_laplacian(1).unwrap();
        assert!((p.apply_inverse(&[3.0]).unwrap()[0] - 1.5).abs() < 1e-15);
        let p = build_laplacian(2).unwrap();
        let x = p.apply_inverse(&[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
        let min = p.spectrum().iter().copied().fold(f64::INFINITY, f64::min);
        let s = PI / 3.0;
        assert!((min - 4.0 * (s / 2.0).sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn identity_is_passthrough() {
        let p = Preconditioner::identity(3);
        let x = [1.0, -2.0, 0.5];
        assert_eq!(p.apply_inverse(&x).unwrap(), x.to_vec());
        assert_eq!(p.apply_inverse_sqrt(&x).unwrap(), x.to_vec());
        assert!(matches!(p.apply(&[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn labels_round_trip() {
        for kind in PrecKind::ALL {
            assert_eq!(kind.label().parse::<PrecKind>().unwrap(), kind);
        }
        assert!("xyz".parse::<PrecKind>().is_err());
    }
}
