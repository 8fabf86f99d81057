//! Conjugate gradient with an optional SPD preconditioner.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, check_len, dot, norm2, Cholesky, LinearOperator};
use crate::preconditioners::Preconditioner;

/// Something that can compute `z = M⁻¹ r` for an SPD `M`.
pub trait InversePreconditioner {
    fn solve_into(&self, r: &[f64], z: &mut [f64]);
}

impl InversePreconditioner for Preconditioner {
    fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        let out = self.apply_inverse(r).expect("preconditioner order matches the system");
        z.copy_from_slice(&out);
    }
}

impl InversePreconditioner for Cholesky {
    fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

/// No preconditioning.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPreconditioner;

impl InversePreconditioner for NoPreconditioner {
    fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingRule {
    pub tol: f64,
    pub max_iterations: usize,
}

impl StoppingRule {
    /// `tol = 1e-7`, at most `10 n` iterations.
    pub fn for_order(n: usize) -> Self {
        Self {
            tol: 1e-7,
            max_iterations: 10 * n.max(1),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖b - A x_k‖₂ / ‖b‖₂` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub solution: Vec<f64>,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }
}

/// Relative size below which `pᵀAp` or `rᵀz` is treated as roundoff.
const BREAKDOWN_RTOL: f64 = 1e-14;

/// Preconditioned CG on `A x = b` from `x0` (zero when `None`).
///
/// The recursive residual drives the iteration; when it drops below `tol`
/// the true residual is recomputed, and the run only stops if that also
/// passes. Otherwise the recursion restarts from the true residual.
pub fn pcg<A, P>(a: &A, p: &P, b: &[f64], x0: Option<&[f64]>, stop: &StoppingRule) -> Result<SolveReport>
where
    A: LinearOperator + ?Sized,
    P: InversePreconditioner + ?Sized,
{
    stop.validate()?;
    let start = Instant::now();
    let n = a.dim();
    check_len(n, b.len())?;
    let mut x = match x0 {
        Some(x0) => {
            check_len(n, x0.len())?;
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(SolveReport {
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
            solution: vec![0.0; n],
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }

    let mut ax = vec![0.0; n];
    let true_residual = |x: &[f64], ax: &mut Vec<f64>, r: &mut Vec<f64>| {
        a.apply_into(x, ax);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
    };
    let mut r = vec![0.0; n];
    true_residual(&x, &mut ax, &mut r);
    let mut history = vec![norm2(&r) / b_norm];
    if history[0] < stop.tol {
        return Ok(SolveReport {
            iterations: 0,
            residual_history: history,
            converged: true,
            solution: x,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }

    let mut z = vec![0.0; n];
    p.solve_into(&r, &mut z);
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut converged = false;
    let mut k = 0;
    while k < stop.max_iterations {
        k += 1;
        if !(rz > 0.0) {
            return Err(Error::Breakdown { iteration: k, value: rz });
        }
        a.apply_into(&dir, &mut q);
        let pq = dot(&dir, &q);
        if !(pq > BREAKDOWN_RTOL * norm2(&dir) * norm2(&q)) {
            return Err(Error::Breakdown { iteration: k, value: pq });
        }
        let alpha = rz / pq;
        axpy(alpha, &dir, &mut x);
        axpy(-alpha, &q, &mut r);
        let mut res = norm2(&r) / b_norm;
        let mut restart = false;
        if res < stop.tol {
            true_residual(&x, &mut ax, &mut r);
            res = norm2(&r) / b_norm;
            restart = res >= stop.tol;
        }
        history.push(res);
        if res < stop.tol {
            converged = true;
            break;
        }
        p.solve_into(&r, &mut z);
        let rz_next = dot(&r, &z);
        if restart {
            dir.copy_from_slice(&z);
        } else {
            let beta = rz_next / rz;
            for (d, zi) in dir.iter_mut().zip(&z) {
                *d = zi + beta * *d;
            }
        }
        rz = rz_next;
    }
    Ok(SolveReport {
        iterations: k,
        residual_history: history,
        converged,
        solution: x,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// `steps` PCG iterations from `x` with a fresh Krylov space, no stopping
/// test. Stops early only if the residual vanishes exactly.
pub fn cg_smooth_step<A, P>(a: &A, p: &P, x: &[f64], b: &[f64], steps: usize) -> Result<Vec<f64>>
where
    A: LinearOperator + ?Sized,
    P: InversePreconditioner + ?Sized,
{
    if steps == 0 {
        return Err(Error::Domain("smoothing needs at least one step".into()));
    }
    let n = a.dim();
    check_len(n, x.len())?;
    check_len(n, b.len())?;
    let mut x = x.to_vec();
    let mut r = a.apply(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    p.solve_into(&r, &mut z);
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for k in 1..=steps {
        if rz == 0.0 {
            break;
        }
        if rz < 0.0 {
            return Err(Error::Breakdown { iteration: k, value: rz });
        }
        a.apply_into(&dir, &mut q);
        let pq = dot(&dir, &q);
        if !(pq > 0.0) {
            return Err(Error::Breakdown { iteration: k, value: pq });
        }
        let alpha = rz / pq;
        axpy(alpha, &dir, &mut x);
        if k == steps {
            break;
        }
        axpy(-alpha, &q, &mut r);
        p.solve_into(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        for (d, zi) in dir.iter_mut().zip(&z) {
            *d = zi + beta * *d;
        }
        rz = rz_next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseSymMatrix;

    #[test]
    fn identity_converges_in_one_step() {
        let a = DenseSymMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 4.0];
        let rep = pcg(&a, &NoPreconditioner, &b, None, &StoppingRule::for_order(5)).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.residual_history.len(), 2);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = DenseSymMatrix::identity(3);
        let rep = pcg(&a, &NoPreconditioner, &[0.0; 3], None, &StoppingRule::for_order(3)).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = DenseSymMatrix::from_fn(2, |i, j| if i == j { [1.0, -1.0][i] } else { 0.0 });
        let err = pcg(&a, &NoPreconditioner, &[1.0, 1.0], None, &StoppingRule::for_order(2)).unwrap_err();
        assert!(matches!(err, Error::Breakdown { iteration: 1, .. }));
    }

    #[test]
    fn iteration_cap_reports_unconverged() {
        let a = DenseSymMatrix::from_fn(6, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let stop = StoppingRule {
            tol: 1e-12,
            max_iterations: 2,
        };
        let rep = pcg(&a, &NoPreconditioner, &[1.0; 6], None, &stop).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn exact_preconditioner_smooths_to_solution() {
        let a = DenseSymMatrix::from_fn(4, |i, j| if i == j { 4.0 } else { 1.0 / (1 + i + j) as f64 });
        let ch = a.cholesky().unwrap();
        let b = [1.0, 2.0, 3.0, 4.0];
        let x = cg_smooth_step(&a, &ch, &[0.0; 4], &b, 1).unwrap();
        let exact = ch.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-13);
        }
        assert!(cg_smooth_step(&a, &ch, &[0.0; 4], &b, 0).is_err());
    }

    #[test]
    fn rejects_bad_tolerance() {
        let a = DenseSymMatrix::identity(2);
        let stop = StoppingRule::for_order(2).with_tol(0.0);
        assert!(pcg(&a, &NoPreconditioner, &[1.0, 1.0], None, &stop).is_err());
    }
}
