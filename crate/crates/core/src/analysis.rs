//! Count distributions, their comparison, and deterministic equidistribution
//! checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::angle::{cos_sin_2pi_frac, Angle, AngleClass, DEFAULT_Q_MAX};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Smallest sample size accepted by [`chi2_two_sample`].
pub const CHI2_MIN_SAMPLES: u64 = 1000;
/// Minimum expected count per pooled bin.
pub const CHI2_MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub experiment_id: String,
    pub seed: u64,
}

/// Empirical law of a nonnegative integer count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    counts: BTreeMap<usize, u64>,
    n_samples: u64,
    pub provenance: Provenance,
}

impl CountDistribution {
    /// From a histogram `k ↦ number of samples equal to k`.
    pub fn from_histogram(counts: BTreeMap<usize, u64>) -> Result<Self> {
        let counts: BTreeMap<usize, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let n_samples = counts.values().sum();
        if n_samples == 0 {
            return Err(Error::EmptyInput("count distribution"));
        }
        Ok(Self {
            counts,
            n_samples,
            provenance: Provenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn histogram(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.counts.get(&k).map_or(0.0, |&c| c as f64 / self.n_samples as f64)
    }

    /// `(k, p(k))` sorted by `k`, support only.
    pub fn pmf(&self) -> Vec<(usize, f64)> {
        self.counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / self.n_samples as f64))
            .collect()
    }

    pub fn mean(&self) -> f64 {
        let total: u128 = self.counts.iter().map(|(&k, &c)| k as u128 * c as u128).sum();
        total as f64 / self.n_samples as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n_samples < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .map(|(&k, &c)| c as f64 * (k as f64 - mean).powi(2))
            .sum();
        ss / (self.n_samples - 1) as f64
    }
}

pub fn empirical_pmf(counts: &[usize]) -> Result<CountDistribution> {
    let mut hist = BTreeMap::new();
    for &k in counts {
        *hist.entry(k).or_insert(0u64) += 1;
    }
    CountDistribution::from_histogram(hist)
}

/// `½ Σ_k |p(k) - q(k)|`.
pub fn tv_distance(p: &CountDistribution, q: &CountDistribution) -> f64 {
    let keys: std::collections::BTreeSet<usize> = p.counts.keys().chain(q.counts.keys()).copied().collect();
    let d: f64 = keys.iter().map(|&k| (p.prob(k) - q.prob(k)).abs()).sum();
    (0.5 * d).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub stat: f64,
    pub pvalue: f64,
    pub dof: usize,
}

/// Two-sample chi-square test of equal distributions.
///
/// Bins are taken in increasing `k` and adjacent bins are pooled until each
/// expected count is at least 5 for both samples; a short remainder joins the
/// last pooled bin.
pub fn chi2_two_sample(p: &CountDistribution, q: &CountDistribution) -> Result<Chi2Result> {
    for d in [p, q] {
        if d.n_samples < CHI2_MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                got: d.n_samples,
                need: CHI2_MIN_SAMPLES,
            });
        }
    }
    let (nr, ns) = (p.n_samples as f64, q.n_samples as f64);
    let keys: std::collections::BTreeSet<usize> = p.counts.keys().chain(q.counts.keys()).copied().collect();
    let min_share = nr.min(ns) / (nr + ns);
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut r, mut s) = (0.0, 0.0);
    for k in keys {
        r += *p.counts.get(&k).unwrap_or(&0) as f64;
        s += *q.counts.get(&k).unwrap_or(&0) as f64;
        if (r + s) * min_share >= CHI2_MIN_EXPECTED {
            bins.push((r, s));
            (r, s) = (0.0, 0.0);
        }
    }
    if r + s > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += r;
                last.1 += s;
            }
            None => bins.push((r, s)),
        }
    }
    let dof = bins.len().saturating_sub(1);
    if dof == 0 {
        return Ok(Chi2Result { stat: 0.0, pvalue: 1.0, dof });
    }
    let (a, b) = ((ns / nr).sqrt(), (nr / ns).sqrt());
    let stat: f64 = bins.iter().map(|&(r, s)| (a * r - b * s).powi(2) / (r + s)).sum();
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(Chi2Result {
        stat,
        pvalue: dist.sf(stat).clamp(0.0, 1.0),
        dof,
    })
}

/// Difference of means with the half-width of its normal 95% interval.
pub fn mean_difference(p: &CountDistribution, q: &CountDistribution) -> (f64, f64) {
    let diff = p.mean() - q.mean();
    let se = (p.variance() / p.n_samples as f64 + q.variance() / q.n_samples as f64).sqrt();
    (diff, 1.96 * se)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub tv: f64,
    /// Absent when either sample is too small for the test.
    pub chi2_stat: Option<f64>,
    pub chi2_pvalue: Option<f64>,
    pub chi2_dof: Option<usize>,
    pub mean_diff: f64,
    pub mean_ci_halfwidth: f64,
}

pub fn compare(p: &CountDistribution, q: &CountDistribution) -> Result<ComparisonVerdict> {
    let chi2 = match chi2_two_sample(p, q) {
        Ok(c) => Some(c),
        Err(Error::InsufficientSamples { .. }) => None,
        Err(e) => return Err(e),
    };
    let (mean_diff, mean_ci_halfwidth) = mean_difference(p, q);
    Ok(ComparisonVerdict {
        tv: tv_distance(p, q),
        chi2_stat: chi2.map(|c| c.stat),
        chi2_pvalue: chi2.map(|c| c.pvalue),
        chi2_dof: chi2.map(|c| c.dof),
        mean_diff,
        mean_ci_halfwidth,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub pvalue: f64,
}

/// Kolmogorov tail `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput("ks sample"));
    }
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    Ok(KsResult {
        statistic: d,
        pvalue: kolmogorov_q((en + 0.12 + 0.11 / en) * d),
    })
}

/// Expected zero count of `Z` on `[a, b]`: `(b - a)/(π√3)`.
///
/// Kac–Rice for a unit-variance stationary Gaussian process gives
/// `(b - a) √λ₂ / π` with `λ₂ = -sinc''(0) = 1/3`.
pub fn kac_rice_mean(a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
    }
    Ok((b - a) / (PI * 3f64.sqrt()))
}

/// `Σ_{r=1}^q |cos(2πr/q)|^α + |sin(2πr/q)|^α`.
fn rational_period_sum(q: u64, alpha: f64) -> f64 {
    (1..=q as i64)
        .map(|r| {
            let (c, s) = cos_sin_2pi_frac(r, q);
            c.abs().powf(alpha) + s.abs().powf(alpha)
        })
        .sum()
}

/// `(1/n) Σ_{k=1}^n |cos ks|^α + |sin ks|^α`.
///
/// For `s` given as a fraction of `π` the sum uses exact periodicity, so for
/// `n` a multiple of the period the result equals [`weyl_limit`] exactly.
pub fn weyl_sigma_alpha(n: u64, s: &Angle, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    if alpha == 2.0 {
        return Ok(1.0);
    }
    let term = |c: f64, s: f64| c.abs().powf(alpha) + s.abs().powf(alpha);
    match *s {
        Angle::PiFraction { num, den } => {
            // s = 2π p/q with p/q = num/(2 den)
            let g = crate::angle::gcd(num.unsigned_abs(), 2 * den);
            let (p, q) = (num / g as i64, 2 * den / g);
            let (full, rem) = (n / q, n % q);
            let period = rational_period_sum(q, alpha);
            if rem == 0 {
                return Ok(period / q as f64);
            }
            let partial: f64 = (1..=rem as i64)
                .map(|k| {
                    let r = ((k as i128 * p as i128).rem_euclid(q as i128)) as i64;
                    let (c, s) = cos_sin_2pi_frac(r, q);
                    term(c, s)
                })
                .sum();
            Ok((full as f64 * period + partial) / n as f64)
        }
        Angle::Radians(s) => {
            let total: f64 = (1..=n)
                .map(|k| {
                    let (sn, c) = (k as f64 * s).sin_cos();
                    term(c, sn)
                })
                .sum();
            Ok(total / n as f64)
        }
    }
}

/// `lim (1/n) σ_n^α`: `∫₀¹ |cos 2πu|^α + |sin 2πu|^α du` for irrational
/// `s/(2π)`, the period average for `s = 2πp/q`.
pub fn weyl_limit(class: AngleClass, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    if alpha == 2.0 {
        return Ok(1.0);
    }
    match class {
        AngleClass::Rational { q, .. } => {
            if q > DEFAULT_Q_MAX {
                return Err(Error::RationalOverflow { q, q_max: DEFAULT_Q_MAX });
            }
            Ok(rational_period_sum(q, alpha) / q as f64)
        }
        AngleClass::Irrational => {
            // four quarter periods contribute equally
            let f = |u: f64| {
                let (s, c) = (2.0 * PI * u).sin_cos();
                c.abs().powf(alpha) + s.abs().powf(alpha)
            };
            Ok(4.0 * adaptive_simpson(&f, 0.0, 0.25, 1e-12))
        }
    }
}

/// Kolmogorov–Smirnov distance between `{k s/(2π) mod 1 : k ≤ n}` and the
/// uniform law on `[0, 1]`.
pub fn equidistribution_ks(n: u64, s: &Angle) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut points: Vec<f64> = match *s {
        Angle::PiFraction { num, den } => {
            let q = 2 * den as i128;
            (1..=n as i128)
                .map(|k| (k * num as i128).rem_euclid(q) as f64 / q as f64)
                .collect()
        }
        Angle::Radians(s) => (1..=n).map(|k| (k as f64 * s / (2.0 * PI)).rem_euclid(1.0)).collect(),
    };
    points.sort_by(f64::total_cmp);
    let nf = n as f64;
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / nf - x).max(x - i as f64 / nf))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(usize, u64)]) -> CountDistribution {
        CountDistribution::from_histogram(pairs.iter().copied().collect()).unwrap()
    }

    #[test]
    fn pmf_examples() {
        let d = empirical_pmf(&[0, 0, 1]).unwrap();
        assert_eq!(d.pmf(), vec![(0, 2.0 / 3.0), (1, 1.0 / 3.0)]);
        assert!(empirical_pmf(&[]).is_err());
    }

    #[test]
    fn tv_examples() {
        let p = dist(&[(0, 5), (1, 5)]);
        assert_eq!(tv_distance(&p, &p), 0.0);
        assert_eq!(tv_distance(&p, &dist(&[(3, 1)])), 1.0);
        assert_eq!(tv_distance(&p, &dist(&[(0, 7)])), 0.5);
    }

    #[test]
    fn chi2_examples() {
        let p = dist(&[(0, 4000), (1, 3000), (2, 2000), (3, 1000)]);
        let q = dist(&[(0, 8000), (1, 6000), (2, 4000), (3, 2000)]);
        let c = chi2_two_sample(&p, &q).unwrap();
        assert!(c.stat.abs() < 1e-20 && c.pvalue == 1.0);
        let far = dist(&[(0, 1000), (1, 3000), (2, 4000), (3, 2000)]);
        assert!(chi2_two_sample(&p, &far).unwrap().pvalue < 1e-6);
        let small = dist(&[(0, 500), (1, 499)]);
        assert!(matches!(chi2_two_sample(&p, &small), Err(Error::InsufficientSamples { .. })));
        let v = compare(&p, &small).unwrap();
        assert!(v.chi2_pvalue.is_none());
    }

    #[test]
    fn sparse_tail_is_pooled() {
        let p = dist(&[(0, 990), (1, 8), (5, 2)]);
        let q = dist(&[(0, 991), (1, 7), (6, 2)]);
        let c = chi2_two_sample(&p, &q).unwrap();
        assert_eq!(c.dof, 1);
    }

    #[test]
    fn kac_rice_examples() {
        assert!((kac_rice_mean(0.0, PI * 3f64.sqrt()).unwrap() - 1.0).abs() < 1e-15);
        assert!((kac_rice_mean(0.0, 2.0).unwrap() - 0.36755).abs() < 1e-4);
        assert!(kac_rice_mean(0.0, 0.0).is_err());
        assert!(kac_rice_mean(0.0, 1e-9).unwrap() < kac_rice_mean(0.0, 1e-8).unwrap());
    }

    #[test]
    fn weyl_examples() {
        let half_pi = Angle::pi_fraction(1, 2).unwrap();
        assert_eq!(weyl_sigma_alpha(4, &half_pi, 1.0).unwrap(), 1.0);
        assert_eq!(weyl_sigma_alpha(4, &Angle::Radians(std::f64::consts::FRAC_PI_2), 2.0).unwrap(), 1.0);
        let q4 = weyl_limit(AngleClass::Rational { p: 1, q: 4 }, 1.0).unwrap();
        assert_eq!(q4, 1.0);
        let irr = weyl_limit(AngleClass::Irrational, 1.0).unwrap();
        assert!((irr - 4.0 / PI).abs() < 1e-10);
        assert_eq!(weyl_limit(AngleClass::Irrational, 2.0).unwrap(), 1.0);
        for n in [4u64, 8, 400, 4000] {
            assert_eq!(weyl_sigma_alpha(n, &half_pi, 1.0).unwrap(), q4);
        }
    }

    #[test]
    fn weyl_limit_matches_gamma_closed_form() {
        use statrs::function::gamma::gamma;
        for &alpha in &[0.3, 0.8, 1.0, 1.5, 1.9] {
            let want = 2.0 * gamma((alpha + 1.0) / 2.0) / (PI.sqrt() * gamma(alpha / 2.0 + 1.0));
            let got = weyl_limit(AngleClass::Irrational, alpha).unwrap();
            assert!((got - want).abs() < 1e-8, "alpha={alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn equidistribution_examples() {
        let pi = Angle::pi_fraction(1, 1).unwrap();
        assert_eq!(equidistribution_ks(10, &pi).unwrap(), 0.5);
        // single point 1/(2π): distance max(1 - x, x)
        let x = 1.0 / (2.0 * PI);
        assert!((equidistribution_ks(1, &Angle::Radians(1.0)).unwrap() - (1.0 - x).max(x)).abs() < 1e-15);
        assert!(equidistribution_ks(0, &pi).is_err());
    }

    #[test]
    fn ks_identical_samples() {
        let x: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let r = ks_two_sample(&x, &x).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.pvalue, 1.0);
        let y: Vec<f64> = x.iter().map(|v| v + 500.0).collect();
        assert!(ks_two_sample(&x, &y).unwrap().pvalue < 1e-10);
    }
}
