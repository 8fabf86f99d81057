use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use fde_toeplitz::experiments::scaled_system;
use fde_toeplitz::krylov::{pcg, NoPreconditioner, StoppingRule};
use fde_toeplitz::linalg::{dot, DenseSymMatrix, LinearOperator};
use fde_toeplitz::multigrid::{Hierarchy, Restriction};
use fde_toeplitz::preconditioners::{build, PrecKind, Preconditioner};
use fde_toeplitz::Error;
use fde_toeplitz::spectral::{count_outliers, dense_sym_eigs, lanczos_extremes, preconditioned_spectrum, SpectrumReport};
use fde_toeplitz::symbols::{eval_fn, Angle, GridSize};
use fde_toeplitz::toeplitz::{assemble_dense, CoeffOptions, ToeplitzCoeffs, ToeplitzOperator};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn sized_vec(lo: usize, hi: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (lo..=hi).prop_flat_map(|n| (Just(n), vec_of(n)))
}

fn random_symmetric(n: usize) -> impl Strategy<Value = DenseSymMatrix> {
    vec_of(n * n).prop_map(move |d| DenseSymMatrix::from_row_major_symmetrized(n, d).unwrap())
}

fn nalgebra_eigs(a: &DenseSymMatrix) -> Vec<f64> {
    let m = DMatrix::from_fn(a.n(), a.n(), |i, j| a.get(i, j));
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Strang's circulant of the scaled system is indefinite for some orders;
/// every other kind must build.
fn spd_preconditioner(kind: PrecKind, c: &ToeplitzCoeffs) -> Option<Preconditioner> {
    match build(kind, c) {
        Ok(p) => Some(p),
        Err(Error::NotSpd { kind: PrecKind::StrangCirculant, min_eigenvalue }) if min_eigenvalue <= 0.0 => None,
        Err(e) => panic!("{kind} at n = {}: {e}", c.n()),
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn symbol_is_even(n in 2usize..512, theta in 0.0f64..PI) {
        let g = GridSize::new(n).unwrap();
        let a = eval_fn(g, Angle::new(theta).unwrap());
        let b = eval_fn(g, Angle::new(-theta).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn toeplitz_operator_is_symmetric((n, x) in sized_vec(1, 200), seed in any::<u64>()) {
        let coeffs: Vec<f64> = (0..n).map(|k| ((k as f64 + 1.0) * (seed % 97) as f64).sin()).collect();
        let op = ToeplitzOperator::new(ToeplitzCoeffs::new(coeffs).unwrap());
        let y: Vec<f64> = x.iter().rev().map(|v| v * 0.5 - 0.1).collect();
        let lhs = dot(&op.apply(&x), &y);
        let rhs = dot(&x, &op.apply(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn dense_eigensolver_matches_nalgebra(a in (1usize..40).prop_flat_map(random_symmetric)) {
        let ours = dense_sym_eigs(&a).unwrap().eigenvalues;
        let theirs = nalgebra_eigs(&a);
        let scale = theirs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_diff(&ours, &theirs) <= 1e-12 * scale);
    }

    #[test]
    fn weyl_monotonicity(a in (2usize..30).prop_flat_map(random_symmetric), v in vec_of(30)) {
        // adding a positive semidefinite rank-one term cannot lower any eigenvalue
        let n = a.n();
        let b = DenseSymMatrix::from_fn(n, |i, j| a.get(i, j) + v[i] * v[j]);
        let ea = dense_sym_eigs(&a).unwrap().eigenvalues;
        let eb = dense_sym_eigs(&b).unwrap().eigenvalues;
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!(*y >= *x - 1e-12);
        }
    }

    #[test]
    fn spectrum_scales_linearly(a in (1usize..30).prop_flat_map(random_symmetric), c in 0.1f64..10.0) {
        let e = dense_sym_eigs(&a).unwrap().eigenvalues;
        let es = dense_sym_eigs(&a.scaled(c)).unwrap().eigenvalues;
        let scaled: Vec<f64> = e.iter().map(|v| v * c).collect();
        prop_assert!(max_diff(&es, &scaled) <= 1e-12 * c * (1.0 + e.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn outlier_counts_partition_spectrum(vals in prop::collection::vec(0.0f64..2.0, 1..100), eps in 0.001f64..0.5) {
        let s = SpectrumReport::from_unsorted(vals.clone());
        let o = count_outliers(&s, eps).unwrap();
        let inside = vals.iter().filter(|v| (**v - 1.0).abs() < eps).count();
        prop_assert_eq!(o.n_out_left + o.n_out_right + inside, vals.len());
    }

    #[test]
    fn restriction_and_prolongation_are_adjoint(k in 2u32..8, seed in any::<u64>()) {
        let n = (1usize << k) - 1;
        let r = Restriction::new(n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| ((i as u64 ^ seed) % 13) as f64 - 6.0).collect();
        let y: Vec<f64> = (0..r.n_coarse()).map(|i| ((i as u64).wrapping_mul(seed) % 7) as f64).collect();
        prop_assert!((dot(&r.restrict(&x), &y) - dot(&x, &r.prolongate(&y))).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn preconditioner_inverse_round_trip(n in 2usize..64, kind_idx in 0usize..6, x in vec_of(64)) {
        let c = scaled_system(n, &CoeffOptions::default()).unwrap();
        let Some(p) = spd_preconditioner(PrecKind::ALL[kind_idx], &c) else { return Ok(()) };
        let x = &x[..n];
        let back = p.apply(&p.apply_inverse(x).unwrap()).unwrap();
        prop_assert!(max_diff(&back, x) <= 1e-10);
    }

    #[test]
    fn preconditioned_spectrum_matches_similarity_transform(n in 2usize..24, kind_idx in 1usize..6) {
        // eigenvalues of P^{-1} A equal those of L^{-1} A L^{-T} with P = L L^T
        let c = scaled_system(n, &CoeffOptions::default()).unwrap();
        let a = assemble_dense(&c);
        let Some(p) = spd_preconditioner(PrecKind::ALL[kind_idx], &c) else { return Ok(()) };
        let ours = preconditioned_spectrum(&a, &p).unwrap().eigenvalues;
        let pd = p.to_dense();
        let pm = DMatrix::from_fn(n, n, |i, j| pd.get(i, j));
        let am = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let l = pm.cholesky().unwrap().l();
        let linv = l.try_inverse().unwrap();
        let m = &linv * am * linv.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let mut theirs: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        let scale = theirs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_diff(&ours, &theirs) <= 1e-9 * scale);
    }

    #[test]
    fn cg_error_decreases_in_energy_norm((n, xs) in sized_vec(4, 96)) {
        let c = scaled_system(n, &CoeffOptions::default()).unwrap();
        let a = assemble_dense(&c);
        let b = a.apply(&xs);
        prop_assume!(b.iter().any(|v| *v != 0.0));
        let mut last = f64::INFINITY;
        let mut checked = 0;
        for k in 1..=n.min(12) {
            let stop = StoppingRule { tol: 1e-14, max_iterations: k };
            let r = pcg(&a, &NoPreconditioner, &b, None, &stop).unwrap();
            let e: Vec<f64> = r.solution.iter().zip(&xs).map(|(u, v)| u - v).collect();
            let energy = dot(&e, &a.apply(&e));
            prop_assert!(energy <= last * (1.0 + 1e-9) + 1e-28);
            last = energy;
            checked += 1;
            if r.converged {
                break;
            }
        }
        prop_assert!(checked >= 2);
    }

    #[test]
    fn pcg_solution_matches_cholesky((n, b) in sized_vec(2, 128), kind_idx in 0usize..6) {
        prop_assume!(b.iter().any(|v| v.abs() > 1e-3));
        let c = scaled_system(n, &CoeffOptions::default()).unwrap();
        let op = ToeplitzOperator::new(c.clone());
        let Some(p) = spd_preconditioner(PrecKind::ALL[kind_idx], &c) else { return Ok(()) };
        let stop = StoppingRule::for_order(n).with_tol(1e-10);
        let r = pcg(&op, &p, &b, None, &stop).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.final_residual() < 1e-10);
        let direct = assemble_dense(&c).cholesky().unwrap().solve(&b).unwrap();
        let scale = direct.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        // cond(A_n/n) grows like n, so allow a matching loss of digits
        prop_assert!(max_diff(&r.solution, &direct) <= 1e-8 * n as f64 * scale);
    }

    #[test]
    fn galerkin_levels_stay_symmetric_positive_definite(k in 2u32..7) {
        let n = (1usize << k) - 1;
        let a = assemble_dense(&scaled_system(n, &CoeffOptions::default()).unwrap());
        let h = Hierarchy::build(a, 1).unwrap();
        prop_assert_eq!(h.num_levels(), k as usize);
        for l in 0..h.num_levels() {
            let m = h.level(l);
            prop_assert!(m.is_symmetric(1e-14 * m.max_abs()));
            prop_assert!(m.cholesky().is_ok());
        }
    }

    #[test]
    fn lanczos_extremes_match_dense(n in 4usize..64, seed in any::<u64>()) {
        let a = assemble_dense(&scaled_system(n, &CoeffOptions::default()).unwrap());
        let s = dense_sym_eigs(&a).unwrap();
        let l = lanczos_extremes(&a, n, seed).unwrap();
        prop_assert!((l.lambda_max_est - s.lambda_max).abs() <= 1e-9 * s.lambda_max);
        prop_assert!((l.lambda_min_est - s.lambda_min).abs() <= 1e-7 * s.lambda_max);
    }
}

#[test]
fn galerkin_of_two_level_matches_explicit_product() {
    let n = 15;
    let a = assemble_dense(&scaled_system(n, &CoeffOptions::default()).unwrap());
    let r = Restriction::new(n).unwrap();
    let nc = r.n_coarse();
    // R as an explicit matrix: column j is R e_j
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            r.restrict(&e)
        })
        .collect();
    let rm = DMatrix::from_fn(nc, n, |i, j| cols[j][i]);
    let am = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let expected = &rm * am * rm.transpose();
    let got = r.galerkin(&a);
    for i in 0..nc {
        for j in 0..nc {
            assert!((got.get(i, j) - expected[(i, j)]).abs() < 1e-13);
        }
    }
}

#[test]
fn strang_is_spd_on_powers_of_two() {
    for k in 3..=11 {
        let c = scaled_system(1 << k, &CoeffOptions::default()).unwrap();
        assert!(build(PrecKind::StrangCirculant, &c).is_ok(), "n = {}", 1 << k);
    }
}
