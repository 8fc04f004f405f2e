//! The polynomial `X_n(t) = Σ ξ_k sin(kt) + η_k cos(kt)` and its window-scaled
//! form `Y_n(u) = X_n(s + u/n) / norm`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expansion::{spectral_window, PiecewiseTaylor};
use crate::sampling::CoefficientPairs;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    xi: Vec<f64>,
    eta: Vec<f64>,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `Σ_{k=1}^n coef(k) z^k` by compensated Horner.
fn compensated_horner(n: usize, coef: impl Fn(usize) -> Complex64, z: Complex64) -> Complex64 {
    let (zr, zi) = (z.re, z.im);
    let (mut ar, mut ai) = (0.0, 0.0);
    let (mut er, mut ei) = (0.0, 0.0);
    for k in (1..=n).rev() {
        let c = coef(k);
        let (p1, e1) = two_prod(ar, zr);
        let (p2, e2) = two_prod(ai, zi);
        let (p3, e3) = two_prod(ar, zi);
        let (p4, e4) = two_prod(ai, zr);
        let (s1, e5) = two_sum(p1, -p2);
        let (s2, e6) = two_sum(p3, p4);
        let (r1, e7) = two_sum(s1, c.re);
        let (r2, e8) = two_sum(s2, c.im);
        let local_r = e1 - e2 + e5 + e7;
        let local_i = e3 + e4 + e6 + e8;
        (er, ei) = (er * zr - ei * zi + local_r, er * zi + ei * zr + local_i);
        (ar, ai) = (r1, r2);
    }
    // final multiplication by z
    let (p1, e1) = two_prod(ar, zr);
    let (p2, e2) = two_prod(ai, zi);
    let (p3, e3) = two_prod(ar, zi);
    let (p4, e4) = two_prod(ai, zr);
    let (s1, e5) = two_sum(p1, -p2);
    let (s2, e6) = two_sum(p3, p4);
    let re = s1 + (er * zr - ei * zi + e1 - e2 + e5);
    let im = s2 + (er * zi + ei * zr + e3 + e4 + e6);
    Complex64::new(re, im)
}

impl TrigPolynomial {
    pub fn new(xi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if xi.is_empty() || xi.len() != eta.len() {
            return Err(Error::InvalidArgument(format!(
                "need equal nonzero lengths, got {} and {}",
                xi.len(),
                eta.len()
            )));
        }
        Ok(Self { xi, eta })
    }

    pub fn from_pairs(pairs: CoefficientPairs) -> Result<Self> {
        Self::new(pairs.xi, pairs.eta)
    }

    pub fn degree(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// `c_k = η_k - i ξ_k`, so that `X_n(t) = Re Σ c_k e^{ikt}`.
    pub fn complex_coefficient(&self, k: usize) -> Complex64 {
        Complex64::new(self.eta[k - 1], -self.xi[k - 1])
    }

    pub fn is_zero(&self) -> bool {
        self.xi.iter().chain(&self.eta).all(|&v| v == 0.0)
    }

    /// `Σ_k |ξ_k| + |η_k|`, the natural scale of rounding errors.
    pub fn abs_sum(&self) -> f64 {
        self.xi.iter().chain(&self.eta).map(|v| v.abs()).sum()
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        compensated_horner(self.degree(), |k| self.complex_coefficient(k), Complex64::new(c, s)).re
    }

    /// `d/dt X_n(t) = Re Σ i k c_k e^{ikt}`.
    pub fn derivative(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let sum = compensated_horner(
            self.degree(),
            |k| self.complex_coefficient(k) * k as f64,
            Complex64::new(c, s),
        );
        -sum.im
    }

    /// Term-by-term evaluation with libm `sin`/`cos`.
    pub fn evaluate_direct(&self, t: f64) -> f64 {
        (1..=self.degree())
            .map(|k| {
                let (s, c) = (k as f64 * t).sin_cos();
                self.xi[k - 1] * s + self.eta[k - 1] * c
            })
            .sum()
    }
}

/// `u ↦ X_n(s + u/n) / norm`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledEvaluator {
    poly: TrigPolynomial,
    s: f64,
    norm: f64,
}

impl ScaledEvaluator {
    pub fn new(poly: TrigPolynomial, s: f64, norm: f64) -> Result<Self> {
        if !(norm > 0.0 && norm.is_finite()) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need finite center and positive normalizer, got s={s}, norm={norm}"
            )));
        }
        Ok(Self { poly, s, norm })
    }

    pub fn poly(&self) -> &TrigPolynomial {
        &self.poly
    }

    pub fn center(&self) -> f64 {
        self.s
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn n(&self) -> f64 {
        self.poly.degree() as f64
    }

    pub fn evaluate_scaled(&self, u: f64) -> f64 {
        self.poly.evaluate(self.s + u / self.n()) / self.norm
    }

    pub fn derivative_scaled(&self, u: f64) -> f64 {
        self.poly.derivative(self.s + u / self.n()) / (self.n() * self.norm)
    }

    /// Values at every grid point; matches [`Self::evaluate_scaled`] up to
    /// rounding at the scale of the coefficients.
    pub fn batch_evaluate_window(&self, grid: &[f64]) -> Vec<f64> {
        match (grid.first(), grid.last()) {
            (Some(&lo), Some(&hi)) if grid.len() >= 32 && hi > lo => {
                let w = self.window(lo, hi);
                grid.iter().map(|&u| w.value(u)).collect()
            }
            _ => grid.iter().map(|&u| self.evaluate_scaled(u)).collect(),
        }
    }

    /// Fast evaluator of `Y_n` and `Y_n'` on `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> PolyWindow {
        let n = self.poly.degree();
        let inv_norm = 1.0 / self.norm;
        let inner = spectral_window(a, b, 1.0, |c| {
            let theta = self.s + c / n as f64;
            (1..=n).map(move |k| {
                let (s, co) = (k as f64 * theta).sin_cos();
                let amp = self.poly.complex_coefficient(k) * Complex64::new(co, s) * inv_norm;
                (amp, k as f64 / n as f64)
            })
        });
        PolyWindow { inner }
    }
}

/// Piecewise-polynomial evaluator of a scaled polynomial on a fixed window.
#[derive(Clone, Debug)]
pub struct PolyWindow {
    inner: PiecewiseTaylor,
}

impl PolyWindow {
    pub fn value(&self, u: f64) -> f64 {
        self.inner.value(u)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.inner.derivative(u)
    }
}

/// Below this distance from `2πℤ` the closed forms are replaced by their
/// limits.
pub const CONTINUITY_TOL: f64 = 1e-8;

/// `(Σ_{k=1}^n cos kθ, Σ_{k=1}^n sin kθ)` in closed form.
///
/// Uses the product forms `sin(nθ/2) cos((n+1)θ/2) / sin(θ/2)` and
/// `sin(nθ/2) sin((n+1)θ/2) / sin(θ/2)`, which equal the Dirichlet-kernel
/// expressions but cancel less.
pub fn trig_sum_closed_form(theta: f64, n: usize) -> (f64, f64) {
    let reduced = theta - TAU * (theta / TAU).round();
    if reduced.abs() < CONTINUITY_TOL {
        return (n as f64, 0.0);
    }
    let nf = n as f64;
    let half = 0.5 * reduced;
    let common = (nf * half).sin() / half.sin();
    let (s1, c1) = ((nf + 1.0) * half).sin_cos();
    (common * c1, common * s1)
}

/// `E[Y_n(t1) Y_n(t2)]` for coefficients with covariance `[[σ1², ρ], [ρ, σ2²]]`.
///
/// Expanding the products of sines and cosines gives
/// `(σ1²+σ2²)/(2n) C(δ) + (σ2²-σ1²)/(2n) C(θ) + ρ/n S(θ)` with
/// `δ = (t1-t2)/n`, `θ = 2s + (t1+t2)/n` and `C`, `S` the cosine and sine sums.
pub fn exact_pair_covariance(
    sigma1_sq: f64,
    sigma2_sq: f64,
    rho: f64,
    n: usize,
    s: f64,
    t1: f64,
    t2: f64,
) -> f64 {
    let nf = n as f64;
    let (c_diff, _) = trig_sum_closed_form((t1 - t2) / nf, n);
    let (c_sum, s_sum) = trig_sum_closed_form(2.0 * s + (t1 + t2) / nf, n);
    ((sigma1_sq + sigma2_sq) * c_diff + (sigma2_sq - sigma1_sq) * c_sum) / (2.0 * nf)
        + rho * s_sum / nf
}

/// Direct `O(n)` version of [`exact_pair_covariance`].
pub fn direct_pair_covariance(
    sigma1_sq: f64,
    sigma2_sq: f64,
    rho: f64,
    n: usize,
    s: f64,
    t1: f64,
    t2: f64,
) -> f64 {
    let nf = n as f64;
    let (x1, x2) = (s + t1 / nf, s + t2 / nf);
    (1..=n)
        .map(|k| {
            let kf = k as f64;
            let (s1, c1) = (kf * x1).sin_cos();
            let (s2, c2) = (kf * x2).sin_cos();
            sigma1_sq * s1 * s2 + sigma2_sq * c1 * c2 + rho * (s1 * c2 + c1 * s2)
        })
        .sum::<f64>()
        / nf
}

/// Distance from the unit circle within which a root is a candidate.
const ORACLE_CANDIDATE_BAND: f64 = 1e-6;

/// All real zeros of `X_n` in `[0, 2π)`, from the unit-circle roots of
/// `Q(z) = z^n · 2 X_n`, each polished by Newton's method on `X_n`.
///
/// Intended for small degrees (the eigenvalue step is cubic in `n`).
pub fn companion_circle_roots_oracle(poly: &TrigPolynomial) -> Result<Vec<f64>> {
    if poly.is_zero() {
        return Err(Error::DegenerateInput { max_abs: 0.0 });
    }
    let n = poly.degree();
    // coefficients of Q in increasing powers
    let mut q = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    for k in 1..=n {
        let c = poly.complex_coefficient(k);
        q[n + k] = c;
        q[n - k] = c.conj();
    }
    while q.last().is_some_and(|c| c.norm() == 0.0) {
        q.pop();
    }
    let low = q.iter().take_while(|c| c.norm() == 0.0).count();
    let q = &q[low..];
    let deg = q.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = q[deg];
    let companion = DMatrix::<Complex64>::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -q[deg - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eigen = companion_eigenvalues(companion).ok_or(Error::OracleUnreliable { modulus: f64::NAN })?;

    let scale = poly.abs_sum();
    let mut zeros: Vec<f64> = Vec::new();
    for z in eigen.iter() {
        let modulus = z.norm();
        if (modulus - 1.0).abs() >= ORACLE_CANDIDATE_BAND {
            continue;
        }
        let start = z.arg().rem_euclid(TAU);
        let t = polish(poly, start, scale).ok_or(Error::OracleUnreliable { modulus })?;
        zeros.push(t.rem_euclid(TAU));
    }
    zeros.sort_by(f64::total_cmp);
    // a root straddling 0 may wrap to just below 2π
    if let (Some(&first), Some(&last)) = (zeros.first(), zeros.last()) {
        if zeros.len() > 1 && TAU - last + first < 1e-9 {
            zeros.pop();
        }
    }
    zeros.dedup_by(|b, a| (*b - *a).abs() < 1e-9);
    if zeros.last().is_some_and(|&t| TAU - t < 1e-12) {
        let t = zeros.pop().unwrap_or_default();
        let wrapped = t - TAU;
        if wrapped.abs() < 1e-12 && zeros.first().is_none_or(|&f| f > 1e-9) {
            zeros.insert(0, 0.0);
        }
    }
    Ok(zeros)
}

/// Eigenvalues by shifted QR with an iteration cap.
///
/// Companion matrices of `z^m - c` are cyclic, and the double-shift QR makes
/// no progress on them; a fixed unitary similarity breaks that structure
/// before the second attempt.
fn companion_eigenvalues(companion: DMatrix<Complex64>) -> Option<DVector<Complex64>> {
    let dim = companion.nrows();
    let cap = 100 * dim.max(10);
    if let Some(schur) = Schur::try_new(companion.clone(), f64::EPSILON, cap) {
        return schur.eigenvalues();
    }
    let v = DVector::from_fn(dim, |i, _| Complex64::from_polar(1.0 + i as f64, 0.7 * i as f64));
    let v = &v / Complex64::new(v.norm(), 0.0);
    let h = DMatrix::<Complex64>::identity(dim, dim) - &v * v.adjoint() * Complex64::new(2.0, 0.0);
    let mixed = &h * companion * &h;
    Schur::try_new(mixed, f64::EPSILON, cap)?.eigenvalues()
}

fn polish(poly: &TrigPolynomial, start: f64, scale: f64) -> Option<f64> {
    let mut t = start;
    for _ in 0..60 {
        let f = poly.evaluate(t);
        let d = poly.derivative(t);
        if f == 0.0 {
            break;
        }
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let step = f / d;
        t -= step;
        if step.abs() <= 1e-15 * t.abs().max(1.0) {
            break;
        }
    }
    let residual = poly.evaluate(t).abs();
    ((t - start).abs() < 1e-4 && residual <= 1e-10 * scale).then_some(t)
}

/// Shared by tests: `t` wrapped to `[0, 2π)`.
pub fn wrap_period(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Lane, StreamKey};
    use crate::sampling::{draw_coefficients_keyed, CoefficientModel, MarginalFamily};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_poly(n: usize, seed: u64) -> TrigPolynomial {
        let model = CoefficientModel::standard(MarginalFamily::Gaussian);
        TrigPolynomial::from_pairs(draw_coefficients_keyed(&model, n, StreamKey::new(seed, 0, Lane::Coefficients)))
            .unwrap()
    }

    #[test]
    fn evaluate_simple_cases() {
        let p = TrigPolynomial::new(vec![1.0], vec![0.0]).unwrap();
        assert!((p.evaluate(FRAC_PI_2) - 1.0).abs() < 1e-15);
        let z = TrigPolynomial::new(vec![0.0; 5], vec![0.0; 5]).unwrap();
        assert_eq!(z.evaluate(1.234), 0.0);
        let p = random_poly(3, 1);
        let (h, d) = (p.evaluate(0.7), p.evaluate_direct(0.7));
        assert!((h - d).abs() <= 1e-12 * d.abs().max(1e-300));
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(TrigPolynomial::new(vec![1.0], vec![]).is_err());
        assert!(TrigPolynomial::new(vec![], vec![]).is_err());
    }

    #[test]
    fn scaled_examples() {
        let p = TrigPolynomial::new(vec![1.0], vec![0.0]).unwrap();
        let ev = ScaledEvaluator::new(p, 0.0, 1.0).unwrap();
        assert!((ev.evaluate_scaled(FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert!((ev.derivative_scaled(0.0) - 1.0).abs() < 1e-15);
        let q = TrigPolynomial::new(vec![0.0], vec![1.0]).unwrap();
        let ev = ScaledEvaluator::new(q, 0.0, 1.0).unwrap();
        assert_eq!(ev.derivative_scaled(0.0), 0.0);

        let p = random_poly(50, 2);
        let ev = ScaledEvaluator::new(p.clone(), 0.9, 50f64.sqrt()).unwrap();
        assert_eq!(ev.evaluate_scaled(0.0), p.evaluate(0.9) / 50f64.sqrt());
        let direct = p.evaluate_direct(0.9 + 1.3 / 50.0) / 50f64.sqrt();
        assert!((ev.evaluate_scaled(1.3) - direct).abs() <= 1e-12 * direct.abs());
        assert!(ScaledEvaluator::new(p, 0.0, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = random_poly(40, 3);
        let ev = ScaledEvaluator::new(p, 1.1, 40f64.sqrt()).unwrap();
        let h = 1e-6;
        let fd = (ev.evaluate_scaled(0.4 + h) - ev.evaluate_scaled(0.4 - h)) / (2.0 * h);
        let d = ev.derivative_scaled(0.4);
        assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0));
    }

    #[test]
    fn batch_matches_pointwise() {
        let p = random_poly(500, 4);
        let ev = ScaledEvaluator::new(p, 1.0, 500f64.sqrt()).unwrap();
        for size in [1usize, 2, 1024] {
            let grid: Vec<f64> = (0..size).map(|i| -1.0 + 3.0 * i as f64 / size as f64).collect();
            let batch = ev.batch_evaluate_window(&grid);
            let point: Vec<f64> = grid.iter().map(|&u| ev.evaluate_scaled(u)).collect();
            let scale = point.iter().fold(0f64, |m, v| m.max(v.abs()));
            for (b, p) in batch.iter().zip(&point) {
                assert!((b - p).abs() <= 1e-12 * scale, "{b} vs {p}");
            }
        }
    }

    #[test]
    fn window_derivative_matches_pointwise() {
        let p = random_poly(300, 5);
        let ev = ScaledEvaluator::new(p, 2.5, 300f64.sqrt()).unwrap();
        let w = ev.window(-4.0, 6.0);
        for i in 0..=100 {
            let u = -4.0 + 0.1 * i as f64;
            let d = ev.derivative_scaled(u);
            assert!((w.derivative(u) - d).abs() < 1e-11, "u={u}");
        }
    }

    #[test]
    fn trig_sum_examples() {
        assert_eq!(trig_sum_closed_form(0.0, 5), (5.0, 0.0));
        assert_eq!(trig_sum_closed_form(TAU * 3.0, 5), (5.0, 0.0));
        let (c, s) = trig_sum_closed_form(FRAC_PI_2, 4);
        assert!(c.abs() < 1e-15 && s.abs() < 1e-15);
        let (c, s) = trig_sum_closed_form(2.0, 7);
        let dc: f64 = (1..=7).map(|k| (2.0 * k as f64).cos()).sum();
        let ds: f64 = (1..=7).map(|k| (2.0 * k as f64).sin()).sum();
        assert!((c - dc).abs() < 1e-12 && (s - ds).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_forms_agree() {
        for &(theta, n) in &[(0.3f64, 10usize), (2.0, 7), (-1.1, 33), (5.9, 100)] {
            let (c, s) = trig_sum_closed_form(theta, n);
            let h = 2.0 * (theta / 2.0).sin();
            let c_d = -0.5 + ((n as f64 + 0.5) * theta).sin() / h;
            let s_d = 0.5 / (theta / 2.0).tan() - ((n as f64 + 0.5) * theta).cos() / h;
            assert!((c - c_d).abs() < 1e-11 && (s - s_d).abs() < 1e-11);
        }
    }

    #[test]
    fn pair_covariance_examples() {
        for n in [1, 7, 100] {
            let v = exact_pair_covariance(1.0, 1.0, 0.0, n, 0.37, 0.8, 0.8);
            assert!((v - 1.0).abs() < 1e-14);
        }
        let v = exact_pair_covariance(1.0, 1.0, 0.0, 10_000, 1.0, 0.0, 2.0);
        assert!((v - 2f64.sin() / 2.0).abs() < 5e-4);
        let v = exact_pair_covariance(1.0, 0.0, 0.0, 10_000, 0.0, 1.0, 1.0);
        assert!((v - 0.5 * (1.0 - 2f64.sin() / 2.0)).abs() < 5e-4);
    }

    #[test]
    fn pair_covariance_matches_direct_sum() {
        let cases = [
            (1.0, 0.5, 0.3, 17, 0.4, 0.2, 1.9),
            (2.0, 0.0, 0.0, 64, 0.0, 0.5, 3.0),
            (0.7, 1.3, -0.6, 333, PI, -1.0, 2.5),
        ];
        for (a, b, r, n, s, t1, t2) in cases {
            let e = exact_pair_covariance(a, b, r, n, s, t1, t2);
            let d = direct_pair_covariance(a, b, r, n, s, t1, t2);
            assert!((e - d).abs() < 1e-11, "{e} vs {d}");
        }
    }

    #[test]
    fn oracle_simple_cases() {
        let cos = TrigPolynomial::new(vec![0.0], vec![1.0]).unwrap();
        let r = companion_circle_roots_oracle(&cos).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] - FRAC_PI_2).abs() < 1e-12 && (r[1] - 3.0 * FRAC_PI_2).abs() < 1e-12);
        let sin = TrigPolynomial::new(vec![1.0], vec![0.0]).unwrap();
        let r = companion_circle_roots_oracle(&sin).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].abs() < 1e-12 && (r[1] - PI).abs() < 1e-12);
        let zero = TrigPolynomial::new(vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert!(companion_circle_roots_oracle(&zero).is_err());
    }

    #[test]
    fn oracle_matches_dense_grid() {
        let p = random_poly(8, 6);
        let roots = companion_circle_roots_oracle(&p).unwrap();
        let m = 1usize << 18;
        let vals: Vec<f64> = (0..=m).map(|i| p.evaluate(TAU * i as f64 / m as f64)).collect();
        let changes = vals.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
        assert_eq!(roots.len(), changes);
        for &t in &roots {
            assert!(p.evaluate(t).abs() < 1e-10 * p.abs_sum());
        }
    }
}
