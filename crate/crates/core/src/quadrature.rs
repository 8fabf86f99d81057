//! Globally adaptive Gauss–Kronrod (7/15) integration and the bound
//! constants `k₁`, `k₂`, `c_∞` and the eigenfunction normalizers `c_n`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbols::{g_value, psi1_modulus_sq, GridSize};

/// Inside this distance of a removable singularity the limit value is used.
pub const PATCH_RADIUS: f64 = 1e-6;

/// Default subdivision budget.
pub const DEFAULT_MAX_INTERVALS: usize = 1 << 20;

/// Start of the tail split for the integrals over `[0, ∞)`.
const TAIL_START: f64 = 4.0 * PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value of an integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult {
    fn combine(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    fn scale(self, factor: f64) -> QuadResult {
        QuadResult {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

/// Absolute tolerance plus subdivision budget.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub tol: f64,
    pub max_intervals: usize,
}

impl Integrator {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_intervals: DEFAULT_MAX_INTERVALS,
        }
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        integrate_breakpoints(self, f, &[a, b])
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() || !error.is_finite() {
        error = f64::INFINITY;
    }
    Segment {
        a,
        b,
        value,
        error,
        resabs,
    }
}

/// `∫_a^b f` by global bisection of the worst interval.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if !(a < b) {
        return Err(Error::Domain(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
    }
    Integrator::new(tol).integrate(f, a, b)
}

/// Integrates over consecutive breakpoints; the pieces share one error budget.
pub fn integrate_breakpoints<F: Fn(f64) -> f64>(
    integrator: &Integrator,
    f: F,
    breaks: &[f64],
) -> Result<QuadResult> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("breakpoints must be strictly increasing".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Segment> = Vec::new();
    for w in breaks.windows(2) {
        heap.push(kronrod15(&f, w[0], w[1]));
    }
    let mut evaluations = 15 * heap.len();
    let mut intervals = heap.len();
    let mut total_error: f64 = heap.iter().map(|s| s.error).sum();
    let mut total_abs: f64 = heap.iter().map(|s| s.resabs).sum();

    loop {
        if intervals % 4096 == 0 || !total_error.is_finite() {
            // running sums drift; resynchronize now and then
            total_error = heap.iter().chain(settled.iter()).map(|s| s.error).sum();
            total_abs = heap.iter().chain(settled.iter()).map(|s| s.resabs).sum();
        }
        let floor = 50.0 * f64::EPSILON * total_abs;
        if total_error <= integrator.tol.max(floor) {
            break;
        }
        let Some(worst) = heap.pop() else {
            // every remaining interval is at the resolution limit
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if worst.b - worst.a <= 64.0 * f64::EPSILON * scale || mid <= worst.a || mid >= worst.b {
            settled.push(worst);
            continue;
        }
        if intervals >= integrator.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                a: breaks[0],
                b: breaks[breaks.len() - 1],
                error_estimate: total_error,
                intervals,
            });
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        total_error += left.error + right.error - worst.error;
        total_abs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
        evaluations += 30;
        intervals += 1;
    }

    let mut value = 0.0;
    let mut error = 0.0;
    for s in heap.iter().chain(settled.iter()) {
        value += s.value;
        error += s.error;
    }
    if !value.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            a: breaks[0],
            b: breaks[breaks.len() - 1],
            error_estimate: f64::INFINITY,
            intervals,
        });
    }
    Ok(QuadResult {
        value,
        abs_error_estimate: error,
        evaluations,
    })
}

/// `∫_{u0}^∞ φ(u) cos²(u/2) du` for positive, decreasing `φ`.
///
/// With `cos² = (1 + cos u)/2`, the smooth half is mapped onto `(0, 1]` by
/// `u = u0/t`. The oscillating half is integrated over doubling windows
/// `[V, 2V]` until `φ(V)` bounds the rest (`|∫_V^∞ φ cos| ≤ 2φ(V)`).
pub fn integrate_cos2_tail<F: Fn(f64) -> f64>(phi: F, u0: f64, tol: f64) -> Result<QuadResult> {
    let smooth = Integrator::new(tol).integrate(
        |t| {
            if t <= 0.0 {
                0.0
            } else {
                let u = u0 / t;
                0.5 * phi(u) * u0 / (t * t)
            }
        },
        0.0,
        1.0,
    )?;
    let mut total = QuadResult {
        value: smooth.value,
        abs_error_estimate: smooth.abs_error_estimate,
        evaluations: smooth.evaluations,
    };
    let mut v = u0;
    let mut window = 0usize;
    while phi(v) > 0.25 * tol {
        let piece_tol = 0.25 * tol / ((window + 1) * (window + 2)) as f64;
        let periods = ((v / (2.0 * PI)).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=periods).map(|i| v + v * i as f64 / periods as f64).collect();
        let piece = integrate_breakpoints(&Integrator::new(piece_tol), |u| 0.5 * phi(u) * u.cos(), &breaks)?;
        total = total.combine(piece);
        v *= 2.0;
        window += 1;
    }
    total.abs_error_estimate += phi(v);
    Ok(total)
}

/// `cos²(u/2) / (u² - π²)²`, written via `cos(u/2) = -sin((u-π)/2)` and
/// patched at `u = π` with the limit `1/(16π²)`.
pub fn c_integrand(u: f64) -> f64 {
    let delta = u - PI;
    if delta.abs() < PATCH_RADIUS {
        return 1.0 / (16.0 * PI * PI);
    }
    let ratio = (0.5 * delta).sin() / delta;
    let sum = u + PI;
    ratio * ratio / (sum * sum)
}

/// Numerator integrand of `k₁`: `g(u) · cos²(u/2) / (u² - π²)²`.
pub fn k1_numerator_integrand(u: f64) -> f64 {
    if (u - 1.0).abs() < PATCH_RADIUS {
        return c_integrand(u);
    }
    g_value(u) * c_integrand(u)
}

/// Integrand of `k₂`, i.e. `g` patched at 0 and 1.
pub fn k2_integrand(sigma: f64) -> f64 {
    if sigma.abs() < PATCH_RADIUS * PATCH_RADIUS {
        return 0.0;
    }
    if (sigma - 1.0).abs() < PATCH_RADIUS {
        return 1.0;
    }
    g_value(sigma)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= 1e-12) {
        return Err(Error::Domain(format!("tolerance {tol:e} below 1e-12")));
    }
    Ok(())
}

/// `k₂ = (1/π) ∫_0^π g(σ) dσ`.
pub fn compute_k2(tol: f64) -> Result<QuadResult> {
    check_tol(tol)?;
    let r = integrate_breakpoints(&Integrator::new(tol * PI), k2_integrand, &[0.0, 1.0, PI])?;
    Ok(r.scale(1.0 / PI))
}

fn c_integral_full(tol: f64) -> Result<QuadResult> {
    let head = integrate_breakpoints(
        &Integrator::new(0.5 * tol),
        c_integrand,
        &[0.0, PI, 2.0 * PI, 3.0 * PI, TAIL_START],
    )?;
    let tail = integrate_cos2_tail(
        |u| {
            let d = u * u - PI * PI;
            1.0 / (d * d)
        },
        TAIL_START,
        0.5 * tol,
    )?;
    Ok(head.combine(tail))
}

/// `c_∞` from `c⁻² = (16/π) ∫_0^∞ cos²(u/2)/(u² - π²)² du`.
pub fn compute_c_infinity(tol: f64) -> Result<QuadResult> {
    check_tol(tol)?;
    // dc/c = dJ/(2J) and J ≈ 0.04, so an absolute J tolerance of 0.01·tol suffices
    let j = c_integral_full(0.01 * tol)?;
    let c = (16.0 / PI * j.value).powf(-0.5);
    Ok(QuadResult {
        value: c,
        abs_error_estimate: 0.5 * c * j.abs_error_estimate / j.value,
        evaluations: j.evaluations,
    })
}

/// `k₁ = ∫_0^∞ g(u) cos²(u/2)/(u²-π²)² du  /  ∫_0^π cos²(u/2)/(u²-π²)² du`.
pub fn compute_k1(tol: f64) -> Result<QuadResult> {
    check_tol(tol)?;
    let den = integrate_breakpoints(&Integrator::new(1e-4 * tol), c_integrand, &[0.0, PI])?;
    let head = integrate_breakpoints(
        &Integrator::new(5e-3 * tol),
        k1_numerator_integrand,
        &[0.0, 1.0, PI, 2.0 * PI, 3.0 * PI, TAIL_START],
    )?;
    let tail = integrate_cos2_tail(
        |u| {
            let d = u * u - PI * PI;
            g_value(u) / (d * d)
        },
        TAIL_START,
        5e-3 * tol,
    )?;
    let num = head.combine(tail);
    let value = num.value / den.value;
    let error = num.abs_error_estimate / den.value
        + num.value.abs() * den.abs_error_estimate / (den.value * den.value);
    Ok(QuadResult {
        value,
        abs_error_estimate: error,
        evaluations: num.evaluations + den.evaluations,
    })
}

/// `c_n = ((1/2π) ∫_{-π}^{π} |ψ₁(θ)|² dθ)^{-1/2}` for the Laplacian's
/// first eigenfunction with unit prefactor.
pub fn compute_c_n(grid: GridSize, tol: f64) -> Result<QuadResult> {
    check_tol(tol)?;
    let n = grid.n();
    let m = n as f64 + 1.0;
    // zeros of the Dirichlet factor sit at odd multiples of π/(n+1)
    let mut breaks = vec![0.0];
    let mut j = 1usize;
    while (j as f64) * PI / m < PI {
        breaks.push(j as f64 * PI / m);
        j += 2;
    }
    breaks.push(PI);
    let r = integrate_breakpoints(&Integrator::new(0.05 * tol), |t| psi1_modulus_sq(n, t), &breaks)?;
    // even integrand: (1/2π)∫_{-π}^{π} = (1/π)∫_0^π
    let norm_sq = r.value / PI;
    let c = norm_sq.powf(-0.5);
    Ok(QuadResult {
        value: c,
        abs_error_estimate: 0.5 * c * (r.abs_error_estimate / PI) / norm_sq,
        evaluations: r.evaluations,
    })
}

/// The constants of the two-sided bound `k₂ ≤ nλ₁(A_n) ≤ k₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub k1: f64,
    pub k2: f64,
    pub c_infinity: f64,
}

/// [`BoundConstants`] with their quadrature diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundEstimates {
    pub k1: QuadResult,
    pub k2: QuadResult,
    pub c_infinity: QuadResult,
}

impl BoundEstimates {
    pub fn compute(tol: f64) -> Result<Self> {
        Ok(Self {
            k1: compute_k1(tol)?,
            k2: compute_k2(tol)?,
            c_infinity: compute_c_infinity(tol)?,
        })
    }

    pub fn constants(&self) -> BoundConstants {
        BoundConstants {
            k1: self.k1.value,
            k2: self.k2.value,
            c_infinity: self.c_infinity.value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integrand, limits and exact value.
    type Case = (fn(f64) -> f64, f64, f64, f64);

    #[test]
    fn analytic_integrals() {
        let cases: [Case; 11] = [
            (|x: f64| x.sin(), 0.0, PI, 2.0),
            (|x: f64| x * x, 0.0, 1.0, 1.0 / 3.0),
            (|x: f64| x.powi(7) - 3.0 * x, -1.0, 2.0, 255.0 / 8.0 - 4.5),
            (|x: f64| x.cos().powi(2), 0.0, 2.0 * PI, PI),
            (|x: f64| x.exp(), 0.0, 1.0, std::f64::consts::E - 1.0),
            (|x: f64| x.ln(), 1e-300, 1.0, -1.0),
            (|x: f64| x * x.ln(), 0.0, 1.0, -0.25),
            (|x: f64| x.sqrt(), 0.0, 4.0, 16.0 / 3.0),
            (|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, PI / 4.0),
            (|x: f64| (10.0 * x).cos(), 0.0, PI, 0.0),
            // ln π + Ci(π) - γ
            (|x: f64| -x.ln() * x.sin(), 0.0, PI, -0.641_182_132_994_292_8),
        ];
        for (i, (f, a, b, exact)) in cases.into_iter().enumerate() {
            let r = integrate_adaptive(f, a, b, 1e-12).unwrap();
            assert!((r.value - exact).abs() < 1e-10, "case {i}: {} vs {exact}", r.value);
            assert!(r.abs_error_estimate >= 0.0 && r.evaluations > 0);
        }
    }

    #[test]
    fn rejects_reversed_bounds() {
        assert!(integrate_adaptive(|x| x, 1.0, 0.0, 1e-8).is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = Integrator::new(1e-14)
            .with_max_intervals(4)
            .integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn patched_integrands() {
        assert_eq!(k2_integrand(1.0), 1.0);
        assert_eq!(k2_integrand(0.0), 0.0);
        let limit = 1.0 / (16.0 * PI * PI);
        assert!((c_integrand(PI) - limit).abs() < 1e-18);
        assert!((c_integrand(PI + 1e-5) - limit).abs() < 1e-5 * limit);
        assert!(k1_numerator_integrand(1.0).is_finite());
        assert!((k1_numerator_integrand(1.0) - c_integrand(1.0)).abs() < 1e-15);
    }

    #[test]
    fn k2_matches_reported_value_and_g_integral() {
        let k2 = compute_k2(1e-8).unwrap();
        assert!((k2.value - 2.2945).abs() < 5e-4, "{}", k2.value);
        let raw = integrate_adaptive(g_value, 0.0, PI, 1e-10).unwrap();
        assert!((raw.value - PI * k2.value).abs() < 1e-8);
        let fine = compute_k2(1e-10).unwrap().value;
        let coarse = compute_k2(1e-6).unwrap().value;
        assert!((fine - coarse).abs() < 1e-6);
    }

    #[test]
    fn c_infinity_matches_reported_value() {
        let c = compute_c_infinity(1e-8).unwrap();
        assert!((c.value - 2.2214).abs() < 5e-4, "{}", c.value);
    }

    #[test]
    fn tail_doubling_is_consistent() {
        // the same integral split at U and at 2U must agree
        let phi = |u: f64| {
            let d = u * u - PI * PI;
            1.0 / (d * d)
        };
        let tol = 1e-10;
        let a = integrate_cos2_tail(phi, 4.0 * PI, tol).unwrap().value;
        let b = integrate_breakpoints(
            &Integrator::new(tol),
            |u| phi(u) * (0.5 * u).cos().powi(2),
            &[4.0 * PI, 6.0 * PI, 8.0 * PI],
        )
        .unwrap()
        .value
            + integrate_cos2_tail(phi, 8.0 * PI, tol).unwrap().value;
        assert!((a - b).abs() < 10.0 * tol, "{a} vs {b}");
    }

    #[test]
    fn constants_are_ordered_and_stable() {
        for (name, f) in [
            ("k1", compute_k1 as fn(f64) -> Result<QuadResult>),
            ("k2", compute_k2),
            ("c", compute_c_infinity),
        ] {
            let tol = 1e-8;
            let a = f(tol).unwrap().value;
            let b = f(tol / 100.0).unwrap().value;
            assert!((a - b).abs() <= 10.0 * tol, "{name}: {a} vs {b}");
        }
        let k = BoundEstimates::compute(1e-8).unwrap().constants();
        assert!(k.k2 < k.k1 && k.k2 > 0.0 && k.c_infinity > 0.0);
    }

    #[test]
    fn c_n_is_bounded_and_approaches_c_infinity() {
        let c_inf = compute_c_infinity(1e-10).unwrap().value;
        let mut values = Vec::new();
        for n in [8, 32, 128, 512, 4096] {
            let c = compute_c_n(GridSize::new(n).unwrap(), 1e-9).unwrap().value;
            assert!(c > 0.0 && c < 10.0);
            values.push(c);
        }
        let last = *values.last().unwrap();
        assert!((last - 2.2214).abs() < 2e-3, "{values:?}");
        assert!((last - c_inf).abs() < 2e-3);
    }

    #[test]
    fn rejects_tiny_tolerance() {
        assert!(compute_k2(1e-13).is_err());
    }
}
