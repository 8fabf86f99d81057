//! Galerkin two-grid and V-cycle solvers with Gauss-Seidel and PCG-step
//! smoothers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{cg_smooth_step, SolveReport, StoppingRule};
use crate::linalg::{check_len, norm2, Cholesky, DenseSymMatrix, LinearOperator};
use crate::preconditioners::{build_frobenius_tau, build_laplacian, build_natural_tau, Preconditioner};
use crate::toeplitz::ToeplitzCoeffs;

pub const DEFAULT_COARSEST_THRESHOLD: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MgmTag {
    Alpha,
    Beta,
    Gamma,
    Delta,
    FinestOnly,
}

impl MgmTag {
    pub const ALL: [MgmTag; 5] = [MgmTag::Alpha, MgmTag::Beta, MgmTag::Gamma, MgmTag::Delta, MgmTag::FinestOnly];

    pub fn label(self) -> &'static str {
        match self {
            MgmTag::Alpha => "alpha",
            MgmTag::Beta => "beta",
            MgmTag::Gamma => "gamma",
            MgmTag::Delta => "delta",
            MgmTag::FinestOnly => "finest",
        }
    }
}

impl fmt::Display for MgmTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MgmTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" | "a" => Ok(MgmTag::Alpha),
            "beta" | "b" => Ok(MgmTag::Beta),
            "gamma" | "g" => Ok(MgmTag::Gamma),
            "delta" | "d" => Ok(MgmTag::Delta),
            "finest" | "finest-only" | "f" => Ok(MgmTag::FinestOnly),
            _ => Err(Error::Domain(format!("unknown multigrid case '{s}'"))),
        }
    }
}

/// Smoother configuration.
///
/// * α: Gauss-Seidel / Gauss-Seidel
/// * β: Gauss-Seidel / tau-PCG
/// * γ: Laplacian-PCG / tau-PCG
/// * δ: Laplacian-PCG / tau-PCG, two post steps
/// * finest-only: γ on the finest level, Gauss-Seidel on coarser ones
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MgmCase {
    pub tag: MgmTag,
    pub nu_pre: usize,
    pub nu_post: usize,
}

impl MgmCase {
    pub fn new(tag: MgmTag, nu_pre: usize, nu_post: usize) -> Result<Self> {
        if nu_pre == 0 && nu_post == 0 {
            return Err(Error::Domain("at least one smoothing step is required".into()));
        }
        Ok(Self { tag, nu_pre, nu_post })
    }

    /// The step counts of the reference configurations.
    pub fn standard(tag: MgmTag) -> Self {
        let nu_post = if tag == MgmTag::Delta { 2 } else { 1 };
        Self { tag, nu_pre: 1, nu_post }
    }
}

/// Which tau projection smooths the finest level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TauVariant {
    Natural,
    #[default]
    Frobenius,
}

impl FromStr for TauVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "natural" | "tn" => Ok(TauVariant::Natural),
            "frobenius" | "tf" => Ok(TauVariant::Frobenius),
            _ => Err(Error::Domain(format!("unknown tau variant '{s}'"))),
        }
    }
}

/// The `(n-1)/2 × n` operator with stencil `[1, 2, 1]` on odd fine points
/// (0-based). Prolongation is its transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Restriction {
    n_fine: usize,
}

impl Restriction {
    pub fn new(n_fine: usize) -> Result<Self> {
        if n_fine < 3 || n_fine.is_multiple_of(2) {
            return Err(Error::InvalidSize {
                n: n_fine,
                reason: "restriction needs an odd size >= 3".into(),
            });
        }
        Ok(Self { n_fine })
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn n_coarse(&self) -> usize {
        (self.n_fine - 1) / 2
    }

    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_coarse())
            .map(|i| x[2 * i] + 2.0 * x[2 * i + 1] + x[2 * i + 2])
            .collect()
    }

    pub fn prolongate(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_fine];
        for (i, &v) in y.iter().enumerate() {
            x[2 * i] += v;
            x[2 * i + 1] += 2.0 * v;
            x[2 * i + 2] += v;
        }
        x
    }

    /// `R A Rᵀ`.
    pub fn galerkin(&self, a: &DenseSymMatrix) -> DenseSymMatrix {
        let (n, nc) = (self.n_fine, self.n_coarse());
        // A Rᵀ stored with rows indexed by coarse column, i.e. (A Rᵀ)ᵀ = R A
        let mut ra = vec![0.0; nc * n];
        for i in 0..nc {
            let dst = &mut ra[i * n..(i + 1) * n];
            for (k, w) in [(2 * i, 1.0), (2 * i + 1, 2.0), (2 * i + 2, 1.0)] {
                for (d, s) in dst.iter_mut().zip(a.row(k)) {
                    *d += w * s;
                }
            }
        }
        DenseSymMatrix::from_fn(nc, |i, j| {
            let row = &ra[i * n..(i + 1) * n];
            row[2 * j] + 2.0 * row[2 * j + 1] + row[2 * j + 2]
        })
    }
}

/// Galerkin level matrices, finest first, with the coarsest factorized.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<DenseSymMatrix>,
    restrictions: Vec<Restriction>,
    coarsest: Cholesky,
    fine_coeffs: Option<ToeplitzCoeffs>,
}

fn check_mgm_size(n: usize) -> Result<()> {
    if n < 3 || !(n + 1).is_power_of_two() {
        return Err(Error::InvalidSize {
            n,
            reason: "multigrid sizes must be 2^k - 1 with k >= 2".into(),
        });
    }
    Ok(())
}

impl Hierarchy {
    /// Coarsens until the size is at most `coarsest_threshold`.
    pub fn build(a: DenseSymMatrix, coarsest_threshold: usize) -> Result<Self> {
        check_mgm_size(a.n())?;
        Self::build_limited(a, coarsest_threshold, usize::MAX)
    }

    /// Exactly one coarsening; the coarse problem is solved directly.
    pub fn two_grid(a: DenseSymMatrix) -> Result<Self> {
        check_mgm_size(a.n())?;
        Self::build_limited(a, 0, 1)
    }

    fn build_limited(a: DenseSymMatrix, threshold: usize, max_coarsenings: usize) -> Result<Self> {
        let mut levels = vec![a];
        let mut restrictions = Vec::new();
        while restrictions.len() < max_coarsenings {
            let current = levels.last().expect("nonempty");
            if current.n() <= threshold || current.n() < 3 {
                break;
            }
            let r = Restriction::new(current.n())?;
            let coarse = r.galerkin(current);
            restrictions.push(r);
            levels.push(coarse);
        }
        let coarsest = levels.last().expect("nonempty").cholesky()?;
        Ok(Self {
            levels,
            restrictions,
            coarsest,
            fine_coeffs: None,
        })
    }

    /// Attaches the finest-level Toeplitz coefficients, enabling the natural
    /// tau smoother there.
    pub fn with_fine_coeffs(mut self, c: ToeplitzCoeffs) -> Result<Self> {
        check_len(self.levels[0].n(), c.n())?;
        self.fine_coeffs = Some(c);
        Ok(self)
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &DenseSymMatrix {
        &self.levels[l]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(DenseSymMatrix::n).collect()
    }
}

/// Forward Gauss-Seidel, `sweeps` passes in index order.
pub fn gauss_seidel_sweep(a: &DenseSymMatrix, x: &mut [f64], b: &[f64], sweeps: usize) -> Result<()> {
    let n = a.n();
    check_len(n, x.len())?;
    check_len(n, b.len())?;
    for _ in 0..sweeps {
        for i in 0..n {
            let row = a.row(i);
            let diag = row[i];
            if diag == 0.0 {
                return Err(Error::ZeroDiagonal { row: i });
            }
            let s = crate::linalg::dot(row, x) - diag * x[i];
            x[i] = (b[i] - s) / diag;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum Smoother {
    GaussSeidel(usize),
    Pcg(Preconditioner, usize),
    None,
}

impl Smoother {
    fn apply(&self, a: &DenseSymMatrix, x: &mut Vec<f64>, b: &[f64]) -> Result<()> {
        match self {
            Smoother::GaussSeidel(s) => gauss_seidel_sweep(a, x, b, *s),
            Smoother::Pcg(p, steps) => {
                *x = cg_smooth_step(a, p, x, b, *steps)?;
                Ok(())
            }
            Smoother::None => Ok(()),
        }
    }
}

struct LevelSmoothers {
    pre: Smoother,
    post: Smoother,
}

fn gs_or_none(steps: usize) -> Smoother {
    if steps == 0 {
        Smoother::None
    } else {
        Smoother::GaussSeidel(steps)
    }
}

fn pcg_or_none(p: impl FnOnce() -> Result<Preconditioner>, steps: usize) -> Result<Smoother> {
    if steps == 0 {
        Ok(Smoother::None)
    } else {
        Ok(Smoother::Pcg(p()?, steps))
    }
}

fn build_smoothers(h: &Hierarchy, case: MgmCase, tau: TauVariant) -> Result<Vec<LevelSmoothers>> {
    let mut out = Vec::new();
    for l in 0..h.num_levels() - 1 {
        let a = &h.levels[l];
        let tau_prec = || -> Result<Preconditioner> {
            match (l, tau, &h.fine_coeffs) {
                (0, TauVariant::Natural, Some(c)) => build_natural_tau(c),
                _ => build_frobenius_tau(a),
            }
        };
        let lap = || build_laplacian(a.n());
        let tag = if case.tag == MgmTag::FinestOnly && l > 0 {
            MgmTag::Alpha
        } else {
            case.tag
        };
        let (nu_pre, nu_post) = if case.tag == MgmTag::FinestOnly && l > 0 {
            (1, 1)
        } else {
            (case.nu_pre, case.nu_post)
        };
        let s = match tag {
            MgmTag::Alpha => LevelSmoothers {
                pre: gs_or_none(nu_pre),
                post: gs_or_none(nu_post),
            },
            MgmTag::Beta => LevelSmoothers {
                pre: gs_or_none(nu_pre),
                post: pcg_or_none(tau_prec, nu_post)?,
            },
            MgmTag::Gamma | MgmTag::Delta | MgmTag::FinestOnly => LevelSmoothers {
                pre: pcg_or_none(lap, nu_pre)?,
                post: pcg_or_none(tau_prec, nu_post)?,
            },
        };
        out.push(s);
    }
    Ok(out)
}

fn cycle(h: &Hierarchy, smoothers: &[LevelSmoothers], l: usize, x: &mut Vec<f64>, b: &[f64]) -> Result<()> {
    let a = &h.levels[l];
    if l + 1 == h.num_levels() {
        x.copy_from_slice(b);
        h.coarsest.solve_in_place(x);
        return Ok(());
    }
    smoothers[l].pre.apply(a, x, b)?;
    let ax = a.apply(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let restriction = &h.restrictions[l];
    let rc = restriction.restrict(&r);
    let mut ec = vec![0.0; rc.len()];
    cycle(h, smoothers, l + 1, &mut ec, &rc)?;
    for (xi, ei) in x.iter_mut().zip(restriction.prolongate(&ec)) {
        *xi += ei;
    }
    smoothers[l].post.apply(a, x, b)
}

fn iterate(
    h: &Hierarchy,
    case: MgmCase,
    tau: TauVariant,
    b: &[f64],
    x0: Option<&[f64]>,
    stop: &StoppingRule,
) -> Result<SolveReport> {
    stop.validate()?;
    let start = Instant::now();
    let a = &h.levels[0];
    let n = a.n();
    check_len(n, b.len())?;
    let mut x = match x0 {
        Some(v) => {
            check_len(n, v.len())?;
            v.to_vec()
        }
        None => vec![0.0; n],
    };
    let smoothers = build_smoothers(h, case, tau)?;
    let b_norm = norm2(b);
    let residual = |x: &[f64]| -> f64 {
        if b_norm == 0.0 {
            return norm2(x);
        }
        let ax = a.apply(x);
        let r: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum();
        r.sqrt() / b_norm
    };
    let mut history = vec![residual(&x)];
    let mut converged = history[0] < stop.tol;
    let mut k = 0;
    while !converged && k < stop.max_iterations {
        k += 1;
        cycle(h, &smoothers, 0, &mut x, b)?;
        let res = residual(&x);
        history.push(res);
        converged = res < stop.tol;
    }
    Ok(SolveReport {
        iterations: k,
        residual_history: history,
        converged,
        solution: x,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// V-cycle iterations until the scaled residual drops below `stop.tol`.
pub fn vcycle(
    h: &Hierarchy,
    case: MgmCase,
    tau: TauVariant,
    b: &[f64],
    x0: Option<&[f64]>,
    stop: &StoppingRule,
) -> Result<SolveReport> {
    iterate(h, case, tau, b, x0, stop)
}

/// Two-grid iterations; `h` must have exactly two levels.
pub fn tgm(
    h: &Hierarchy,
    case: MgmCase,
    tau: TauVariant,
    b: &[f64],
    x0: Option<&[f64]>,
    stop: &StoppingRule,
) -> Result<SolveReport> {
    if h.num_levels() != 2 {
        return Err(Error::InvalidSize {
            n: h.num_levels(),
            reason: "two-grid method needs exactly two levels".into(),
        });
    }
    iterate(h, case, tau, b, x0, stop)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> DenseSymMatrix {
        DenseSymMatrix::from_fn(n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        })
    }

    #[test]
    fn restriction_shapes() {
        let r = Restriction::new(3).unwrap();
        assert_eq!(r.restrict(&[1.0, 0.0, 0.0]), vec![1.0]);
        assert_eq!(r.restrict(&[0.0, 1.0, 0.0]), vec![2.0]);
        let r = Restriction::new(7).unwrap();
        assert_eq!(r.n_coarse(), 3);
        assert_eq!(r.restrict(&[1.0; 7]), vec![4.0; 3]);
        assert_eq!(r.prolongate(&[1.0, 0.0, 0.0]), vec![1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(Restriction::new(8).is_err());
        assert!(Restriction::new(1).is_err());
    }

    #[test]
    fn hierarchy_sizes() {
        let h = Hierarchy::build(laplacian(31), DEFAULT_COARSEST_THRESHOLD).unwrap();
        assert_eq!(h.sizes(), vec![31, 15]);
        let h = Hierarchy::build(laplacian(63), DEFAULT_COARSEST_THRESHOLD).unwrap();
        assert_eq!(h.sizes(), vec![63, 31, 15]);
        assert!(Hierarchy::build(laplacian(30), 15).is_err());
        let h = Hierarchy::two_grid(laplacian(63)).unwrap();
        assert_eq!(h.sizes(), vec![63, 31]);
    }

    #[test]
    fn gauss_seidel_on_diagonal() {
        let a = DenseSymMatrix::from_fn(3, |i, j| if i == j { (i + 2) as f64 } else { 0.0 });
        let mut x = vec![0.0; 3];
        gauss_seidel_sweep(&a, &mut x, &[2.0, 3.0, 4.0], 1).unwrap();
        assert_eq!(x, vec![1.0, 1.0, 1.0]);
        let z = DenseSymMatrix::zeros(2);
        assert!(matches!(
            gauss_seidel_sweep(&z, &mut [0.0, 0.0], &[1.0, 1.0], 1),
            Err(Error::ZeroDiagonal { row: 0 })
        ));
    }

    #[test]
    fn gauss_seidel_two_by_two() {
        let a = DenseSymMatrix::from_fn(2, |i, j| [[2.0, 1.0], [1.0, 3.0]][i][j]);
        let mut x = vec![0.0, 0.0];
        gauss_seidel_sweep(&a, &mut x, &[1.0, 1.0], 1).unwrap();
        // x0 = 1/2, x1 = (1 - 1/2)/3
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn case_parsing_and_validation() {
        for tag in MgmTag::ALL {
            assert_eq!(tag.label().parse::<MgmTag>().unwrap(), tag);
        }
        assert!(MgmCase::new(MgmTag::Alpha, 0, 0).is_err());
        assert_eq!(MgmCase::standard(MgmTag::Delta).nu_post, 2);
    }
}
