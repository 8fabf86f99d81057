//! Scalar functions behind the matrices: the order-dependent symbol `f_n`,
//! its asymptotic profile `g`, the remainder `r_n`, the discrete Laplacian
//! symbol, the Laplacian's first eigenfunction and the periodized bound
//! function `p` used for the lower bound.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, Integrator};

/// Guard distance (radians) around the removable poles of [`eval_psi1`].
pub const PSI1_POLE_GUARD: f64 = 1e-8;

/// Below this value of `|log(n|θ|)| / n` the closed geometric form of `f_n`
/// loses its digits to 0/0 cancellation and the direct sum is used instead.
const GEOMETRIC_SWITCH: f64 = 1e-6;

/// Matrix order `n` together with the mesh width `h = 1/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSize {
    n: usize,
    h: f64,
}

impl GridSize {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize {
                n,
                reason: "matrix order must be at least 2".into(),
            });
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

/// An angle in `[-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta.abs() > PI {
            return Err(Error::Domain(format!("angle {theta} outside [-pi, pi]")));
        }
        Ok(Self(theta))
    }

    pub fn radians(&self) -> f64 {
        self.0
    }
}

/// An even, real, `2π`-periodic function. Implementations only need to be
/// correct on `[0, π]`; callers fold their argument before evaluating.
pub trait Symbol: Sync {
    fn eval(&self, theta: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> Symbol for F {
    fn eval(&self, theta: f64) -> f64 {
        self(theta)
    }
}

/// The generating function `f_n` of `A_n`.
#[derive(Debug, Clone, Copy)]
pub struct FnSymbol {
    pub grid: GridSize,
}

impl Symbol for FnSymbol {
    fn eval(&self, theta: f64) -> f64 {
        fn_value(self.grid, theta.abs().min(PI))
    }
}

/// `4 sin^2(θ/2) = 2 - 2cos θ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaplacianSymbol;

impl Symbol for LaplacianSymbol {
    fn eval(&self, theta: f64) -> f64 {
        laplacian_value(theta)
    }
}

/// `a_0 + 2 Σ_{k≥1} a_k cos(kθ)`: the symbol with prescribed cosine coefficients.
#[derive(Debug, Clone)]
pub struct CosineSymbol {
    pub coeffs: Vec<f64>,
}

impl Symbol for CosineSymbol {
    fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.coeffs.first().copied().unwrap_or(0.0);
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            acc += 2.0 * a * (k as f64 * theta).cos();
        }
        acc
    }
}

/// `θ ↦ p(n|θ|)`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledBoundSymbol {
    pub n: usize,
    pub k2: f64,
}

impl Symbol for ScaledBoundSymbol {
    fn eval(&self, theta: f64) -> f64 {
        eval_p(self.n as f64 * theta.abs(), self.k2)
    }
}

/// `f_n(θ) = θ² Σ_{j<n} (n|θ|)^{-j/n}`.
pub fn eval_fn(grid: GridSize, theta: Angle) -> f64 {
    fn_value(grid, theta.radians().abs())
}

/// Unchecked evaluation of `f_n` for `θ ≥ 0`.
pub(crate) fn fn_value(grid: GridSize, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let n = grid.n() as f64;
    let scaled = n * theta;
    let log_scaled = scaled.ln();
    if log_scaled.abs() / n < GEOMETRIC_SWITCH {
        return fn_direct_sum(grid, theta);
    }
    // (1 - 1/(nθ)) / (1 - (nθ)^{-1/n}) written with expm1 for both factors
    theta * theta * (-log_scaled).exp_m1() / (-log_scaled * grid.h()).exp_m1()
}

/// Literal `n`-term evaluation of `f_n`; the fallback near `n|θ| = 1`.
pub fn fn_direct_sum(grid: GridSize, theta: f64) -> f64 {
    let theta = theta.abs();
    if theta == 0.0 {
        return 0.0;
    }
    let ratio = (grid.n() as f64 * theta).powf(-grid.h());
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..grid.n() {
        sum += term;
        term *= ratio;
    }
    theta * theta * sum
}

/// `g(σ) = (σ² - σ) / log σ`, continuously extended with `g(0) = 0`, `g(1) = 1`.
pub fn eval_g(sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("g is defined for sigma >= 0, got {sigma}")));
    }
    Ok(g_value(sigma))
}

pub(crate) fn g_value(sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let shifted = sigma - 1.0;
    if shifted == 0.0 {
        return 1.0;
    }
    // sigma * (sigma - 1) / log(1 + (sigma - 1)) stays accurate near sigma = 1
    sigma * shifted / shifted.ln_1p()
}

/// `r_n(θ) = n f_n(θ) - g(n|θ|)`.
pub fn eval_remainder(grid: GridSize, theta: Angle) -> f64 {
    let t = theta.radians().abs();
    grid.n() as f64 * fn_value(grid, t) - g_value(grid.n() as f64 * t)
}

/// `a(θ) = 4 sin²(θ/2)`.
pub fn eval_laplacian_symbol(theta: Angle) -> f64 {
    laplacian_value(theta.radians())
}

fn laplacian_value(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    4.0 * s * s
}

/// First eigenfunction of `T_n(a)` in the Fourier domain, scaled by `c`.
pub fn eval_psi1(grid: GridSize, theta: Angle, c: f64) -> Result<Complex64> {
    let t = theta.radians();
    let m = grid.n() as f64 + 1.0;
    let s = PI / m;
    let distance = (t - s).abs().min((t + s).abs());
    if distance < PSI1_POLE_GUARD {
        return Err(Error::Singularity {
            distance,
            guard: PSI1_POLE_GUARD,
        });
    }
    let phase = Complex64::from_polar(1.0, 0.5 * m * t);
    let amplitude =
        c / m.powf(1.5) * (0.5 * m * t).cos() / ((0.5 * (t - s)).sin() * (0.5 * (t + s)).sin());
    Ok(phase * amplitude)
}

/// `|ψ_1(θ)|²` with `c = 1`, in a form with no removable poles:
/// `cos((n+1)θ/2) = -sin((n+1)(θ-s)/2)`, so the pole at `θ = s` becomes a
/// Dirichlet-kernel quotient.
pub(crate) fn psi1_modulus_sq(n: usize, theta: f64) -> f64 {
    let m = n as f64 + 1.0;
    let s = PI / m;
    let t = theta.abs();
    let delta = t - s;
    let kernel = if delta == 0.0 {
        m
    } else {
        (0.5 * m * delta).sin() / (0.5 * delta).sin()
    };
    let other = (0.5 * (t + s)).sin();
    kernel * kernel / (m * m * m * other * other)
}

/// Fold `σ` into `[-π, π]` and take the absolute value.
pub fn fold_to_half_period(sigma: f64) -> f64 {
    let two_pi = 2.0 * PI;
    (sigma - two_pi * (sigma / two_pi).round()).abs()
}

/// The periodized bound function `p(σ) = k₂ - g(|σ̂|)`.
pub fn eval_p(sigma: f64, k2: f64) -> f64 {
    k2 - g_value(fold_to_half_period(sigma))
}

/// Cosine coefficients `(1/π) ∫_0^π p(nθ) cos(kθ) dθ` for `k = 0..=kmax`.
/// Every one of them vanishes: `p(n|·|)` only has frequencies that are
/// multiples of `n`.
pub fn fourier_coeffs_of_scaled_p(grid: GridSize, kmax: usize, k2: f64, tol: f64) -> Result<Vec<f64>> {
    let n = grid.n();
    if kmax >= n {
        return Err(Error::Domain(format!("kmax {kmax} must be below n = {n}")));
    }
    let symbol = ScaledBoundSymbol { n, k2 };
    // p(nθ) has kinks wherever nθ is a multiple of π
    let breaks: Vec<f64> = (0..=n).map(|j| j as f64 * PI / n as f64).collect();
    let integrator = Integrator::new(tol / n as f64);
    (0..=kmax)
        .map(|k| {
            let kf = k as f64;
            let r = quadrature::integrate_breakpoints(
                &integrator,
                |t| symbol.eval(t) * (kf * t).cos(),
                &breaks,
            )?;
            Ok(r.value / PI)
        })
        .collect()
}
