//! Table and figure generators behind the command-line runner.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krylov::{pcg, SolveReport, StoppingRule};
use crate::linalg::LinearOperator;
use crate::multigrid::{tgm, vcycle, Hierarchy, MgmCase, MgmTag, TauVariant, DEFAULT_COARSEST_THRESHOLD};
use crate::preconditioners::{build, PrecKind};
use crate::quadrature::{compute_c_n, BoundEstimates};
use crate::spectral::{count_outliers, dense_sym_eigs, preconditioned_spectrum, OutlierReport, SpectrumReport};
use crate::symbols::GridSize;
use crate::toeplitz::{assemble_dense, CoeffOptions, ToeplitzCoeffs, ToeplitzOperator};

/// Right-hand side used for the iteration-count tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RhsKind {
    /// `b = (1, …, 1)`.
    #[default]
    Ones,
    /// `b = A x*` with `x*` uniform on `[0, 1)` from a seeded generator.
    RandomSolution,
}

impl FromStr for RhsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ones" => Ok(RhsKind::Ones),
            "random-solution" | "random" => Ok(RhsKind::RandomSolution),
            _ => Err(Error::Domain(format!("unknown right-hand side '{s}'"))),
        }
    }
}

pub fn right_hand_side<A: LinearOperator + ?Sized>(kind: RhsKind, a: &A, seed: u64) -> Vec<f64> {
    let n = a.dim();
    match kind {
        RhsKind::Ones => vec![1.0; n],
        RhsKind::RandomSolution => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            a.apply(&x)
        }
    }
}

/// Coefficients of `A_n / n`.
pub fn scaled_system(n: usize, options: &CoeffOptions) -> Result<ToeplitzCoeffs> {
    let grid = GridSize::new(n)?;
    Ok(ToeplitzCoeffs::for_fn(grid, options)?.scaled(1.0 / n as f64))
}

/// Expands `a..b` (powers of two, or `2^k - 1` values) or a comma list.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Domain(format!("cannot parse size list '{spec}'"));
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        let (offset, mut p) = if lo.is_power_of_two() && hi.is_power_of_two() {
            (0, lo)
        } else if (lo + 1).is_power_of_two() && (hi + 1).is_power_of_two() {
            (1, lo + 1)
        } else {
            return Err(Error::Domain(format!(
                "range '{spec}' must join two powers of two or two values of the form 2^k - 1"
            )));
        };
        let mut out = Vec::new();
        while p - offset <= hi {
            out.push(p - offset);
            p *= 2;
        }
        return Ok(out);
    }
    spec.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()
        .and_then(|v| if v.is_empty() || v.contains(&0) { Err(bad()) } else { Ok(v) })
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub k1: f64,
    pub k1_error: f64,
    pub k2: f64,
    pub k2_error: f64,
    pub c_infinity: f64,
    pub c_infinity_error: f64,
}

impl BoundsReport {
    pub fn compute(tol: f64) -> Result<Self> {
        let e = BoundEstimates::compute(tol)?;
        Ok(Self {
            k1: e.k1.value,
            k1_error: e.k1.abs_error_estimate,
            k2: e.k2.value,
            k2_error: e.k2.abs_error_estimate,
            c_infinity: e.c_infinity.value,
            c_infinity_error: e.c_infinity.abs_error_estimate,
        })
    }

    pub fn to_csv(&self) -> String {
        let header = ["constant", "value", "error_estimate"].map(String::from);
        let rows = [
            ("k1", self.k1, self.k1_error),
            ("k2", self.k2, self.k2_error),
            ("c_infinity", self.c_infinity, self.c_infinity_error),
        ]
        .iter()
        .map(|(name, v, e)| vec![name.to_string(), sci(*v), sci(*e)])
        .collect::<Vec<_>>();
        csv(&header, &rows)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CnRow {
    pub n: usize,
    pub c_n: f64,
    pub error_estimate: f64,
}

pub fn cn_table(sizes: &[usize], tol: f64) -> Result<Vec<CnRow>> {
    sizes
        .iter()
        .map(|&n| {
            let r = compute_c_n(GridSize::new(n)?, tol)?;
            Ok(CnRow {
                n,
                c_n: r.value,
                error_estimate: r.abs_error_estimate,
            })
        })
        .collect()
}

pub fn cn_csv(rows: &[CnRow]) -> String {
    let header = ["n", "c_n"].map(String::from);
    let body: Vec<_> = rows.iter().map(|r| vec![r.n.to_string(), sci(r.c_n)]).collect();
    csv(&header, &body)
}

#[derive(Debug, Clone, Serialize)]
pub struct MinEigRow {
    pub n: usize,
    pub n_lambda1: f64,
    pub k2: f64,
    pub k1: f64,
}

pub fn mineig_table(sizes: &[usize], options: &CoeffOptions, k1: f64, k2: f64) -> Result<Vec<MinEigRow>> {
    sizes
        .iter()
        .map(|&n| {
            let grid = GridSize::new(n)?;
            Ok(MinEigRow {
                n,
                n_lambda1: crate::spectral::min_eig_normalized(grid, options)?,
                k2,
                k1,
            })
        })
        .collect()
}

pub fn mineig_csv(rows: &[MinEigRow]) -> String {
    let header = ["n", "n_lambda1", "k2", "k1"].map(String::from);
    let body: Vec<_> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), sci(r.n_lambda1), sci(r.k2), sci(r.k1)])
        .collect();
    csv(&header, &body)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoeffRow {
    pub n: usize,
    pub index: usize,
    pub value: f64,
}

/// Coefficients of the unscaled `A_n`.
pub fn coeff_table(sizes: &[usize], options: &CoeffOptions) -> Result<Vec<CoeffRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        let c = ToeplitzCoeffs::for_fn(GridSize::new(n)?, options)?;
        rows.extend(c.as_slice().iter().enumerate().map(|(index, &value)| CoeffRow { n, index, value }));
    }
    Ok(rows)
}

pub fn coeff_csv(rows: &[CoeffRow]) -> String {
    let header = ["n", "index", "value"].map(String::from);
    let body: Vec<_> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.index.to_string(), sci(r.value)])
        .collect();
    csv(&header, &body)
}

#[derive(Debug, Clone, Serialize)]
pub struct PcgRun {
    pub n: usize,
    pub preconditioner: PrecKind,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Copy)]
pub struct PcgConfig {
    pub tol: f64,
    pub rhs: RhsKind,
    pub seed: u64,
}

impl Default for PcgConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            rhs: RhsKind::Ones,
            seed: 0,
        }
    }
}

/// Solves `(A_n/n) x = b` from `x0 = 0` with every requested preconditioner.
pub fn pcg_table(sizes: &[usize], precs: &[PrecKind], cfg: &PcgConfig, options: &CoeffOptions) -> Result<Vec<PcgRun>> {
    let mut runs = Vec::new();
    for &n in sizes {
        let c = scaled_system(n, options)?;
        let op = ToeplitzOperator::new(c.clone());
        let b = right_hand_side(cfg.rhs, &op, cfg.seed);
        let stop = StoppingRule::for_order(n).with_tol(cfg.tol);
        for &kind in precs {
            let p = build(kind, &c)?;
            runs.push(PcgRun {
                n,
                preconditioner: kind,
                report: pcg(&op, &p, &b, None, &stop)?,
            });
        }
    }
    Ok(runs)
}

/// Wide layout: one row per size, one column per preconditioner.
pub fn pcg_csv(runs: &[PcgRun]) -> String {
    let mut kinds: Vec<PrecKind> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for r in runs {
        if !kinds.contains(&r.preconditioner) {
            kinds.push(r.preconditioner);
        }
        if !sizes.contains(&r.n) {
            sizes.push(r.n);
        }
    }
    let mut header = vec!["Size".to_string()];
    header.extend(kinds.iter().map(|k| k.label().to_string()));
    let body: Vec<_> = sizes
        .iter()
        .map(|&n| {
            let mut row = vec![n.to_string()];
            for k in &kinds {
                let cell = runs
                    .iter()
                    .find(|r| r.n == n && r.preconditioner == *k)
                    .map(|r| {
                        if r.report.converged {
                            r.report.iterations.to_string()
                        } else {
                            format!(">{}", r.report.iterations)
                        }
                    })
                    .unwrap_or_default();
                row.push(cell);
            }
            row
        })
        .collect();
    csv(&header, &body)
}

#[derive(Debug, Clone, Serialize)]
pub struct PreconditionedSpectrum {
    pub n: usize,
    pub preconditioner: PrecKind,
    pub spectrum: SpectrumReport,
}

/// Spectra of `P⁻¹ (A_n/n)` with `P` built from the same scaled
/// coefficients (the Laplacian is the unscaled `tridiag(-1, 2, -1)`).
/// `Identity` yields the spectrum of `A_n/n` itself.
pub fn preconditioned_spectra(sizes: &[usize], precs: &[PrecKind], options: &CoeffOptions) -> Result<Vec<PreconditionedSpectrum>> {
    let mut out = Vec::new();
    for &n in sizes {
        let c = scaled_system(n, options)?;
        let a = assemble_dense(&c);
        for &kind in precs {
            let spectrum = if kind == PrecKind::Identity {
                dense_sym_eigs(&a)?
            } else {
                preconditioned_spectrum(&a, &build(kind, &c)?)?
            };
            out.push(PreconditionedSpectrum {
                n,
                preconditioner: kind,
                spectrum,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremesRow {
    pub n: usize,
    pub preconditioner: PrecKind,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub fn extremes(spectra: &[PreconditionedSpectrum]) -> Vec<ExtremesRow> {
    spectra
        .iter()
        .map(|s| ExtremesRow {
            n: s.n,
            preconditioner: s.preconditioner,
            lambda_min: s.spectrum.lambda_min,
            lambda_max: s.spectrum.lambda_max,
        })
        .collect()
}

/// Wide layout mirroring the extreme-eigenvalue tables.
pub fn extremes_csv(rows: &[ExtremesRow]) -> String {
    let mut kinds: Vec<PrecKind> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for r in rows {
        if !kinds.contains(&r.preconditioner) {
            kinds.push(r.preconditioner);
        }
        if !sizes.contains(&r.n) {
            sizes.push(r.n);
        }
    }
    let mut header = vec!["Size".to_string()];
    for k in &kinds {
        header.push(format!("lambda_min({k}^-1 A)"));
        header.push(format!("lambda_max({k}^-1 A)"));
    }
    let body: Vec<_> = sizes
        .iter()
        .map(|&n| {
            let mut row = vec![n.to_string()];
            for k in &kinds {
                match rows.iter().find(|r| r.n == n && r.preconditioner == *k) {
                    Some(r) => {
                        row.push(sci(r.lambda_min));
                        row.push(sci(r.lambda_max));
                    }
                    None => row.extend([String::new(), String::new()]),
                }
            }
            row
        })
        .collect();
    csv(&header, &body)
}

#[derive(Debug, Clone, Serialize)]
pub struct OutlierRow {
    pub n: usize,
    pub preconditioner: PrecKind,
    pub eps: f64,
    pub report: OutlierReport,
}

pub fn outlier_table(spectra: &[PreconditionedSpectrum], eps: &[f64]) -> Result<Vec<OutlierRow>> {
    let mut rows = Vec::new();
    for s in spectra {
        for &e in eps {
            rows.push(OutlierRow {
                n: s.n,
                preconditioner: s.preconditioner,
                eps: e,
                report: count_outliers(&s.spectrum, e)?,
            });
        }
    }
    Ok(rows)
}

/// One row per (size, preconditioner); each `eps` contributes the left
/// count, right count and percentage columns.
pub fn outlier_csv(rows: &[OutlierRow]) -> String {
    let mut eps: Vec<f64> = Vec::new();
    let mut keys: Vec<(usize, PrecKind)> = Vec::new();
    for r in rows {
        if !eps.contains(&r.eps) {
            eps.push(r.eps);
        }
        if !keys.contains(&(r.n, r.preconditioner)) {
            keys.push((r.n, r.preconditioner));
        }
    }
    let mut header = vec!["Size".to_string(), "Preconditioner".to_string()];
    for e in &eps {
        header.push(format!("n_out_l(eps={e})"));
        header.push(format!("n_out_r(eps={e})"));
        header.push(format!("percent(eps={e})"));
    }
    let body: Vec<_> = keys
        .iter()
        .map(|&(n, k)| {
            let mut row = vec![n.to_string(), k.label().to_string()];
            for e in &eps {
                match rows.iter().find(|r| r.n == n && r.preconditioner == k && r.eps == *e) {
                    Some(r) => {
                        row.push(r.report.n_out_left.to_string());
                        row.push(r.report.n_out_right.to_string());
                        row.push(sci(r.report.percent));
                    }
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
            }
            row
        })
        .collect();
    csv(&header, &body)
}

#[derive(Debug, Clone, Serialize)]
pub struct MgmRow {
    pub n: usize,
    pub case: MgmCase,
    pub tgm: SolveReport,
    pub vcycle: SolveReport,
}

#[derive(Debug, Clone, Copy)]
pub struct MgmConfig {
    pub tol: f64,
    pub rhs: RhsKind,
    pub seed: u64,
    pub tau: TauVariant,
    pub coarsest_threshold: usize,
}

impl Default for MgmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            rhs: RhsKind::Ones,
            seed: 0,
            tau: TauVariant::Frobenius,
            coarsest_threshold: DEFAULT_COARSEST_THRESHOLD,
        }
    }
}

pub fn mgm_table(sizes: &[usize], cases: &[MgmCase], cfg: &MgmConfig, options: &CoeffOptions) -> Result<Vec<MgmRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        let c = scaled_system(n, options)?;
        let a = assemble_dense(&c);
        let b = right_hand_side(cfg.rhs, &a, cfg.seed);
        let multi = Hierarchy::build(a.clone(), cfg.coarsest_threshold)?.with_fine_coeffs(c.clone())?;
        let two = Hierarchy::two_grid(a)?.with_fine_coeffs(c)?;
        let stop = StoppingRule::for_order(n).with_tol(cfg.tol);
        for &case in cases {
            rows.push(MgmRow {
                n,
                case,
                tgm: tgm(&two, case, cfg.tau, &b, None, &stop)?,
                vcycle: vcycle(&multi, case, cfg.tau, &b, None, &stop)?,
            });
        }
    }
    Ok(rows)
}

pub fn mgm_csv(rows: &[MgmRow]) -> String {
    let header = ["Size", "Case", "TGM", "Vcycle"].map(String::from);
    let fmt = |r: &SolveReport| {
        if r.converged {
            r.iterations.to_string()
        } else {
            format!(">{}", r.iterations)
        }
    };
    let body: Vec<_> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.case.tag.label().to_string(), fmt(&r.tgm), fmt(&r.vcycle)])
        .collect();
    csv(&header, &body)
}

/// Default case list: the four smoother configurations plus finest-only.
pub fn standard_cases() -> Vec<MgmCase> {
    MgmTag::ALL.iter().map(|&t| MgmCase::standard(t)).collect()
}
