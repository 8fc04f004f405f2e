//! Piecewise Taylor expansions for fast evaluation on a bounded window.
//!
//! A root scan evaluates one function a few thousand times on a short
//! interval. For the band-limited sums used here this is far cheaper as a
//! polynomial in a local variable than term by term.

use num_complex::Complex64;

/// Target truncation error relative to the coefficient mass.
const TAYLOR_EPS: f64 = 1e-17;
/// Largest `Ω r` per piece.
const MAX_PHASE_SPAN: f64 = 1.5;
const MAX_DEGREE: usize = 48;

#[derive(Clone, Debug)]
struct Piece {
    center: f64,
    half_width: f64,
    /// Coefficients of the piece in the local variable `y = (u - center) / half_width`.
    coef: Vec<f64>,
}

impl Piece {
    fn value(&self, u: f64) -> f64 {
        let y = (u - self.center) / self.half_width;
        self.coef.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }

    fn derivative(&self, u: f64) -> f64 {
        let y = (u - self.center) / self.half_width;
        let mut acc = 0.0f64;
        for (m, &c) in self.coef.iter().enumerate().skip(1).rev() {
            acc = acc * y + m as f64 * c;
        }
        acc / self.half_width
    }
}

/// Polynomial pieces covering `[a, b]`.
#[derive(Clone, Debug)]
pub(crate) struct PiecewiseTaylor {
    a: f64,
    width: f64,
    pieces: Vec<Piece>,
}

impl PiecewiseTaylor {
    /// Splits `[a, b]` into pieces of half-width `r ≤ max_half_width` and
    /// fills each with `coefficients(center, r)`.
    pub(crate) fn build(
        a: f64,
        b: f64,
        max_half_width: f64,
        mut coefficients: impl FnMut(f64, f64) -> Vec<f64>,
    ) -> Self {
        let width = b - a;
        let count = ((width / (2.0 * max_half_width)).ceil() as usize).max(1);
        let r = width / (2.0 * count as f64);
        let pieces = (0..count)
            .map(|i| {
                let center = a + (2 * i + 1) as f64 * r;
                Piece {
                    center,
                    half_width: r,
                    coef: coefficients(center, r),
                }
            })
            .collect();
        Self { a, width, pieces }
    }

    fn piece(&self, u: f64) -> &Piece {
        let last = self.pieces.len() - 1;
        let idx = ((u - self.a) / self.width * self.pieces.len() as f64).floor();
        &self.pieces[if idx <= 0.0 { 0 } else { (idx as usize).min(last) }]
    }

    pub(crate) fn value(&self, u: f64) -> f64 {
        self.piece(u).value(u)
    }

    pub(crate) fn derivative(&self, u: f64) -> f64 {
        self.piece(u).derivative(u)
    }
}

/// Smallest degree `D` with `x^{D+1}/(D+1)! ≤ TAYLOR_EPS`.
fn exp_series_degree(x: f64) -> usize {
    let mut term = 1.0;
    for d in 0..MAX_DEGREE {
        term *= x / (d + 1) as f64;
        if term <= TAYLOR_EPS && d >= 4 {
            return d;
        }
    }
    MAX_DEGREE
}

/// `f(u) = Re Σ_j a_j e^{i ω_j u}`, tabulated on `[a, b]`.
///
/// `centered(c)` must yield the pairs `(a_j e^{i ω_j c}, ω_j)`.
pub(crate) fn spectral_window<I>(
    a: f64,
    b: f64,
    max_freq: f64,
    mut centered: impl FnMut(f64) -> I,
) -> PiecewiseTaylor
where
    I: Iterator<Item = (Complex64, f64)>,
{
    let max_half_width = if max_freq > 0.0 {
        MAX_PHASE_SPAN / max_freq
    } else {
        f64::INFINITY
    };
    PiecewiseTaylor::build(a, b, max_half_width, |c, r| {
        let degree = exp_series_degree(max_freq * r);
        let mut coef = vec![0.0; degree + 1];
        for (amp, omega) in centered(c) {
            // Re(amp (i ω r)^m / m!) cycles through re, -im, -re, im.
            let x = omega * r;
            let mut w = 1.0;
            for (m, slot) in coef.iter_mut().enumerate() {
                let part = match m % 4 {
                    0 => amp.re,
                    1 => -amp.im,
                    2 => -amp.re,
                    _ => amp.im,
                };
                *slot += w * part;
                w *= x / (m + 1) as f64;
            }
        }
        coef
    })
}

/// `sinc x = sin x / x`, with `sinc 0 = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Derivative of [`sinc`].
pub fn sinc_prime(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        -x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0))
    } else {
        let (s, c) = x.sin_cos();
        (x * c - s) / (x * x)
    }
}

/// Taylor coefficients of `sinc` at 0: `a_j = (-1)^{j/2}/(j+1)!` for even `j`.
const SINC_SERIES_LEN: usize = 64;

fn sinc_series() -> [f64; SINC_SERIES_LEN] {
    let mut a = [0.0; SINC_SERIES_LEN];
    let mut fact = 1.0; // (j+1)!
    for (j, slot) in a.iter_mut().enumerate() {
        fact *= (j + 1) as f64;
        if j % 2 == 0 {
            *slot = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 } / fact;
        }
    }
    a
}

/// Distance ratio bound between the local variable and far nodes.
const CARDINAL_RATIO: f64 = 3.0;
const CARDINAL_DEGREE: usize = 36;

/// Window evaluator for the cardinal series `Σ_k N_k sinc(t - πk)`.
///
/// Writing `sinc(t - πk) = (-1)^k sin t / (t - πk)`, the terms far from the
/// piece center are summed as one power series in `t - center` and multiplied
/// by the series of `sin t`; the few near terms are re-expanded from the
/// series of `sinc` at 0.
pub(crate) fn cardinal_window(coeffs: &[f64], cutoff: i64, a: f64, b: f64) -> PiecewiseTaylor {
    let sinc0 = sinc_series();
    PiecewiseTaylor::build(a, b, 1.0, |center, r| {
        let mut far = vec![0.0; CARDINAL_DEGREE + 1];
        let mut near = vec![0.0; CARDINAL_DEGREE + 1];
        for (idx, &nk) in coeffs.iter().enumerate() {
            if nk == 0.0 {
                continue;
            }
            let k = idx as i64 - cutoff;
            let d = center - std::f64::consts::PI * k as f64;
            if d.abs() < CARDINAL_RATIO * r {
                // sinc(d + r y) = Σ_m y^m r^m Σ_{j≥m} a_j C(j, m) d^{j-m}
                let mut rm = 1.0;
                for (m, slot) in near.iter_mut().enumerate() {
                    let mut binom = 1.0;
                    let mut dp = 1.0;
                    let mut acc = 0.0;
                    for (j, &aj) in sinc0.iter().enumerate().skip(m) {
                        acc += aj * binom * dp;
                        binom = binom * (j + 1) as f64 / (j + 1 - m) as f64;
                        dp *= d;
                    }
                    *slot += nk * rm * acc;
                    rm *= r;
                }
                continue;
            }
            let signed = if k % 2 == 0 { nk } else { -nk };
            // 1/(d + r y) = Σ_m (-r y)^m / d^{m+1}
            let q = -r / d;
            let mut p = signed / d;
            for slot in far.iter_mut() {
                *slot += p;
                p *= q;
            }
        }
        // series of sin(center + r y)
        let (sc, cc) = center.sin_cos();
        let mut sin_series = vec![0.0; CARDINAL_DEGREE + 1];
        let mut w = 1.0;
        for (m, slot) in sin_series.iter_mut().enumerate() {
            *slot = w * [sc, cc, -sc, -cc][m % 4];
            w *= r / (m + 1) as f64;
        }
        (0..=CARDINAL_DEGREE)
            .map(|m| near[m] + (0..=m).map(|i| sin_series[i] * far[m - i]).sum::<f64>())
            .collect()
    })
}
