//! Sample paths and covariances of the limit processes.
//!
//! * `Z`: stationary Gaussian with covariance `sinc(t1 - t2)`, sampled by the
//!   truncated cardinal series `Σ_{|k|≤K} N_k sinc(t - πk)`.
//! * `G`: Gaussian limit for coefficients with covariance `[[σ1², ρ], [ρ, σ2²]]`,
//!   `G(t) = ∫₀¹ sin(tu) dRe W(u) + ∫₀¹ cos(tu) dIm W(u)`.
//! * `Z_ν`: the same Stieltjes form against an α-stable Lévy process.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::angle::{Angle, AngleClass};
use crate::error::{Error, Result};
use crate::expansion::{cardinal_window, sinc, sinc_prime, spectral_window, PiecewiseTaylor};
use crate::quad::adaptive_simpson;
use crate::rng::StreamKey;
use crate::sampling::{sqrt_psd_2x2, SpectralAtom, SpectralMeasure, StableAxes, ISOTROPIC_ATOMS};

pub const DEFAULT_CUTOFF: usize = 512;
pub const DEFAULT_STEPS: usize = 1024;
pub const MIN_CUTOFF: usize = 64;
pub const MIN_STEPS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind {
    Z,
    GGeneric {
        sigma1_sq: f64,
        sigma2_sq: f64,
        rho: f64,
    },
    GLattice {
        sigma1_sq: f64,
        sigma2_sq: f64,
        rho: f64,
    },
    Znu {
        alpha: f64,
        atoms: SpectralMeasure,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    /// Cardinal-series cutoff `K` for `Z`.
    pub cutoff: usize,
    /// Integration steps `m` for `G` and `Z_ν`.
    pub steps: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            steps: DEFAULT_STEPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSpec {
    kind: LimitKind,
    discretization: Discretization,
}

fn check_gaussian_params(sigma1_sq: f64, sigma2_sq: f64, rho: f64) -> Result<()> {
    if !(sigma1_sq >= 0.0 && sigma2_sq >= 0.0 && sigma1_sq + sigma2_sq > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidLimit(format!(
            "variances must be nonnegative with positive sum, got ({sigma1_sq}, {sigma2_sq})"
        )));
    }
    if rho.abs() > (sigma1_sq * sigma2_sq).sqrt() * (1.0 + 1e-12) {
        return Err(Error::InvalidLimit(format!("|rho| = {} violates Cauchy–Schwarz", rho.abs())));
    }
    Ok(())
}

impl LimitSpec {
    pub fn new(kind: LimitKind, discretization: Discretization) -> Result<Self> {
        if discretization.cutoff < MIN_CUTOFF {
            return Err(Error::InvalidLimit(format!(
                "cardinal cutoff must be at least {MIN_CUTOFF}, got {}",
                discretization.cutoff
            )));
        }
        if discretization.steps < MIN_STEPS {
            return Err(Error::InvalidLimit(format!(
                "integration steps must be at least {MIN_STEPS}, got {}",
                discretization.steps
            )));
        }
        match &kind {
            LimitKind::Z => {}
            &LimitKind::GGeneric {
                sigma1_sq,
                sigma2_sq,
                rho,
            }
            | &LimitKind::GLattice {
                sigma1_sq,
                sigma2_sq,
                rho,
            } => check_gaussian_params(sigma1_sq, sigma2_sq, rho)?,
            LimitKind::Znu { alpha, .. } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::InvalidLimit(format!("alpha must lie in (0, 2), got {alpha}")));
                }
            }
        }
        Ok(Self { kind, discretization })
    }

    pub fn z() -> Self {
        Self::new(LimitKind::Z, Discretization::default()).expect("defaults are valid")
    }

    pub fn kind(&self) -> &LimitKind {
        &self.kind
    }

    pub fn discretization(&self) -> Discretization {
        self.discretization
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            LimitKind::Z => "z",
            LimitKind::GGeneric { .. } => "g_generic",
            LimitKind::GLattice { .. } => "g_lattice",
            LimitKind::Znu { .. } => "znu",
        }
    }
}

/// Cardinal terms closer than this to `t` are evaluated through `sinc` itself.
const NEAR_NODE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
enum PathRepr {
    /// `scale · Σ_i coeffs[i] sinc(t - π(i - K))`
    Cardinal { coeffs: Vec<f64>, cutoff: i64, scale: f64 },
    /// `Σ_j sin(t u_j) dx_j + cos(t u_j) dy_j`, `u_j = (j + ½)/m`
    Stieltjes { dx: Vec<f64>, dy: Vec<f64> },
}

/// A sampled path, evaluable with its derivative at any real `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitPath {
    repr: PathRepr,
    pub spec: Option<LimitSpec>,
    pub seed_path: Option<StreamKey>,
}

impl LimitPath {
    /// Cardinal series with `coeffs.len() = 2K + 1` coefficients for `k = -K..=K`.
    pub fn cardinal(coeffs: Vec<f64>, scale: f64) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("cardinal series needs 2K+1 coefficients".into()));
        }
        let cutoff = (coeffs.len() / 2) as i64;
        Ok(Self {
            repr: PathRepr::Cardinal { coeffs, cutoff, scale },
            spec: None,
            seed_path: None,
        })
    }

    /// Riemann–Stieltjes sum against increments `(ΔRe, ΔIm)` at midpoint nodes.
    pub fn stieltjes(increments: Vec<(f64, f64)>) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::EmptyInput("stieltjes increments"));
        }
        let (dx, dy) = increments.into_iter().unzip();
        Ok(Self {
            repr: PathRepr::Stieltjes { dx, dy },
            spec: None,
            seed_path: None,
        })
    }

    fn node(j: usize, m: usize) -> f64 {
        (j as f64 + 0.5) / m as f64
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.repr {
            PathRepr::Cardinal { coeffs, cutoff, scale } => {
                // sinc(t - πk) = (-1)^k sin t / (t - πk) away from the node
                let sin_t = t.sin();
                let mut far = 0.0;
                let mut near = 0.0;
                for (i, &c) in coeffs.iter().enumerate() {
                    let k = i as i64 - cutoff;
                    let d = t - PI * k as f64;
                    if d.abs() < NEAR_NODE {
                        near += c * sinc(d);
                    } else {
                        far += if k % 2 == 0 { c } else { -c } / d;
                    }
                }
                scale * (sin_t * far + near)
            }
            PathRepr::Stieltjes { dx, dy } => {
                let m = dx.len();
                (0..m)
                    .map(|j| {
                        let (s, c) = (t * Self::node(j, m)).sin_cos();
                        s * dx[j] + c * dy[j]
                    })
                    .sum()
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.repr {
            PathRepr::Cardinal { coeffs, cutoff, scale } => {
                // sinc'(d) = (-1)^k (cos t / d - sin t / d²)
                let (sin_t, cos_t) = t.sin_cos();
                let (mut inv, mut inv_sq, mut near) = (0.0, 0.0, 0.0);
                for (i, &c) in coeffs.iter().enumerate() {
                    let k = i as i64 - cutoff;
                    let d = t - PI * k as f64;
                    if d.abs() < NEAR_NODE {
                        near += c * sinc_prime(d);
                    } else {
                        let signed = if k % 2 == 0 { c } else { -c } / d;
                        inv += signed;
                        inv_sq += signed / d;
                    }
                }
                scale * (cos_t * inv - sin_t * inv_sq + near)
            }
            PathRepr::Stieltjes { dx, dy } => {
                let m = dx.len();
                (0..m)
                    .map(|j| {
                        let u = Self::node(j, m);
                        let (s, c) = (t * u).sin_cos();
                        u * (c * dx[j] - s * dy[j])
                    })
                    .sum()
            }
        }
    }

    /// Fast evaluator of the path and its derivative on `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> PathWindow {
        match &self.repr {
            PathRepr::Cardinal { coeffs, cutoff, scale } => {
                let scaled: Vec<f64> = coeffs.iter().map(|c| c * scale).collect();
                PathWindow(cardinal_window(&scaled, *cutoff, a, b))
            }
            PathRepr::Stieltjes { dx, dy } => {
                let m = dx.len();
                PathWindow(spectral_window(a, b, 1.0, |c| {
                    (0..m).map(move |j| {
                        let u = Self::node(j, m);
                        let (s, co) = (c * u).sin_cos();
                        (Complex64::new(dy[j], -dx[j]) * Complex64::new(co, s), u)
                    })
                }))
            }
        }
    }
}

/// Piecewise-polynomial evaluator of a [`LimitPath`] on a fixed window.
#[derive(Clone, Debug)]
pub struct PathWindow(PiecewiseTaylor);

impl PathWindow {
    pub fn value(&self, t: f64) -> f64 {
        self.0.value(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.0.derivative(t)
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < MIN_CUTOFF {
        Err(Error::InvalidLimit(format!("cutoff must be at least {MIN_CUTOFF}, got {cutoff}")))
    } else {
        Ok(())
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < MIN_STEPS {
        Err(Error::InvalidLimit(format!("steps must be at least {MIN_STEPS}, got {steps}")))
    } else {
        Ok(())
    }
}

/// `Z` from `2K + 1` i.i.d. standard Gaussians.
pub fn sample_z_path<R: Rng + ?Sized>(cutoff: usize, rng: &mut R) -> Result<LimitPath> {
    check_cutoff(cutoff)?;
    let coeffs = (0..2 * cutoff + 1).map(|_| rng.sample(StandardNormal)).collect();
    LimitPath::cardinal(coeffs, 1.0)
}

/// `G` for either Gaussian variant.
///
/// Away from the lattice `G` is `sqrt((σ1²+σ2²)/2) · Z`; on the lattice the
/// Brownian integral is discretized with `m` midpoint increments.
pub fn sample_g_path<R: Rng + ?Sized>(spec: &LimitSpec, rng: &mut R) -> Result<LimitPath> {
    let disc = spec.discretization;
    match *spec.kind() {
        LimitKind::GGeneric {
            sigma1_sq, sigma2_sq, ..
        } => {
            let mut path = sample_z_path(disc.cutoff, rng)?;
            if let PathRepr::Cardinal { scale, .. } = &mut path.repr {
                *scale = (0.5 * (sigma1_sq + sigma2_sq)).sqrt();
            }
            Ok(path)
        }
        LimitKind::GLattice {
            sigma1_sq,
            sigma2_sq,
            rho,
        } => {
            check_steps(disc.steps)?;
            let root = sqrt_psd_2x2(sigma1_sq, rho, sigma2_sq);
            let h = (1.0 / disc.steps as f64).sqrt();
            let increments = (0..disc.steps)
                .map(|_| {
                    let u: f64 = rng.sample(StandardNormal);
                    let v: f64 = rng.sample(StandardNormal);
                    (
                        h * (root[0][0] * u + root[0][1] * v),
                        h * (root[1][0] * u + root[1][1] * v),
                    )
                })
                .collect();
            LimitPath::stieltjes(increments)
        }
        _ => Err(Error::InvalidLimit(format!("{} is not a G limit", spec.label()))),
    }
}

/// `Z_ν` with `m` stable increments whose spectral measure is `atoms / m`.
pub fn sample_znu_path<R: Rng + ?Sized>(
    alpha: f64,
    atoms: &SpectralMeasure,
    steps: usize,
    rng: &mut R,
) -> Result<LimitPath> {
    check_steps(steps)?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidLimit(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if !atoms.is_symmetric() {
        return Err(Error::InvalidLimit("Z_ν needs a symmetric spectral measure".into()));
    }
    let plan = StableAxes::new(alpha, atoms, 1.0 / steps as f64);
    let increments = (0..steps).map(|_| plan.draw(rng)).collect();
    LimitPath::stieltjes(increments)
}

/// Samples the path described by `spec` on the stream `key`.
pub fn sample_path(spec: &LimitSpec, key: StreamKey) -> Result<LimitPath> {
    let mut rng = key.rng();
    let mut path = match spec.kind() {
        LimitKind::Z => sample_z_path(spec.discretization.cutoff, &mut rng)?,
        LimitKind::GGeneric { .. } | LimitKind::GLattice { .. } => sample_g_path(spec, &mut rng)?,
        LimitKind::Znu { alpha, atoms } => sample_znu_path(*alpha, atoms, spec.discretization.steps, &mut rng)?,
    };
    path.spec = Some(spec.clone());
    path.seed_path = Some(key);
    Ok(path)
}

/// `(1 - cos x)/x`, equal to 0 at `x = 0`.
fn one_minus_cos_over(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x / 2.0 * (1.0 - x * x / 12.0)
    } else {
        (1.0 - x.cos()) / x
    }
}

/// Closed-form covariance `E[G(t1) G(t2)]` of the Gaussian limits.
pub fn limit_covariance(spec: &LimitSpec, t1: f64, t2: f64) -> Result<f64> {
    match *spec.kind() {
        LimitKind::Z => Ok(sinc(t1 - t2)),
        LimitKind::GGeneric {
            sigma1_sq, sigma2_sq, ..
        } => Ok(0.5 * (sigma1_sq + sigma2_sq) * sinc(t1 - t2)),
        LimitKind::GLattice {
            sigma1_sq,
            sigma2_sq,
            rho,
        } => Ok(0.5 * (sigma1_sq + sigma2_sq) * sinc(t1 - t2) - 0.5 * (sigma1_sq - sigma2_sq) * sinc(t1 + t2)
            + rho * one_minus_cos_over(t1 + t2)),
        LimitKind::Znu { .. } => Err(Error::InvalidLimit(
            "Z_ν has no finite second moment".into(),
        )),
    }
}

/// The rotation-averaged Lévy measure for a window centered at `s`.
///
/// For `s = 2πp/q` every atom `(φ, w)` becomes `q` atoms `(φ - 2πk/q, w/q)`;
/// otherwise the result is isotropic, represented by
/// [`ISOTROPIC_ATOMS`] equal atoms carrying the total weight.
pub fn tilt_levy_measure(atoms: &SpectralMeasure, s: &Angle, q_max: u64) -> Result<SpectralMeasure> {
    match s.classify(q_max)? {
        AngleClass::Irrational => SpectralMeasure::isotropic(ISOTROPIC_ATOMS, atoms.total_weight()),
        AngleClass::Rational { q, .. } => SpectralMeasure::new(atoms.atoms().iter().flat_map(|a| {
            (1..=q).map(move |k| SpectralAtom {
                angle: a.angle - TAU * k as f64 / q as f64,
                weight: a.weight / q as f64,
            })
        })),
    }
}

/// `Re log E exp(i a Z_ν(t)) = -|a|^α Σ_φ w_φ ∫₀¹ |sin(tu + φ)|^α du`.
pub fn znu_log_charfn(alpha: f64, atoms: &SpectralMeasure, t: f64, a: f64) -> f64 {
    let integral: f64 = atoms
        .atoms()
        .iter()
        .map(|atom| {
            let phi = atom.angle;
            atom.weight * adaptive_simpson(&|u: f64| (t * u + phi).sin().abs().powf(alpha), 0.0, 1.0, 1e-11)
        })
        .sum();
    -a.abs().powf(alpha) * integral
}

/// `1 - Σ_{|k|≤K} sinc²(t - πk)`: the variance missing from the truncated series.
pub fn cardinal_variance_deficit(cutoff: usize, t: f64) -> f64 {
    let k = cutoff as i64;
    1.0 - (-k..=k).map(|j| sinc(t - PI * j as f64).powi(2)).sum::<f64>()
}

/// Bound `2 / (π² (K - |t|/π))` on the truncated tail, valid for `|t| ≤ πK/2`.
pub fn cardinal_truncation_bound(cutoff: usize, t: f64) -> Option<f64> {
    let k = cutoff as f64;
    (t.abs() <= PI * k / 2.0).then(|| 2.0 / (PI * PI * (k - t.abs() / PI)))
}

/// Checks the truncation bound at the ends and midpoint of `[a, b]`.
pub fn check_truncation(cutoff: usize, a: f64, b: f64) -> Result<()> {
    for t in [a, 0.5 * (a + b), b] {
        let bound = cardinal_truncation_bound(cutoff, t).ok_or_else(|| {
            Error::InvalidLimit(format!("window point {t} is beyond πK/2 for K = {cutoff}"))
        })?;
        let deficit = cardinal_variance_deficit(cutoff, t);
        if deficit > bound {
            return Err(Error::InvalidLimit(format!(
                "truncated variance deficit {deficit:e} at t = {t} exceeds {bound:e}"
            )));
        }
    }
    Ok(())
}

/// Values of `Z` on a grid by Cholesky factorization of the sinc covariance.
///
/// Only a cross-check for the cardinal-series sampler.
pub fn sample_z_grid_cholesky<R: Rng + ?Sized>(ts: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if ts.is_empty() {
        return Err(Error::EmptyInput("grid"));
    }
    let n = ts.len();
    let cov = DMatrix::from_fn(n, n, |i, j| sinc(ts[i] - ts[j]) + if i == j { 1e-10 } else { 0.0 });
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("sinc covariance not positive definite".into()))?;
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((chol.l() * z).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Lane;
    use std::f64::consts::FRAC_PI_2;

    fn key() -> StreamKey {
        StreamKey::new(5, 0, Lane::LimitPath)
    }

    #[test]
    fn spec_validation() {
        let d = Discretization::default();
        assert!(LimitSpec::new(LimitKind::Z, Discretization { cutoff: 63, ..d }).is_err());
        assert!(LimitSpec::new(LimitKind::Z, Discretization { steps: 255, ..d }).is_err());
        let bad = LimitKind::GLattice { sigma1_sq: 1.0, sigma2_sq: 1.0, rho: 1.5 };
        assert!(LimitSpec::new(bad, d).is_err());
    }

    #[test]
    fn zero_and_unit_cardinal_paths() {
        let zero = LimitPath::cardinal(vec![0.0; 129], 1.0).unwrap();
        assert_eq!(zero.value(0.7), 0.0);
        let mut c = vec![0.0; 129];
        c[64] = 1.0;
        let unit = LimitPath::cardinal(c, 1.0).unwrap();
        assert_eq!(unit.value(0.0), 1.0);
        for &t in &[0.3, 1.0, 2.5, 7.0] {
            assert!((unit.value(t) - t.sin() / t).abs() < 1e-15);
        }
        assert!(sample_z_path(10, &mut key().rng()).is_err());
    }

    #[test]
    fn zero_increments_give_zero_path() {
        let p = LimitPath::stieltjes(vec![(0.0, 0.0); 256]).unwrap();
        assert_eq!(p.value(1.3), 0.0);
        assert_eq!(p.derivative(1.3), 0.0);
    }

    #[test]
    fn znu_at_zero_sums_imaginary_increments() {
        let atoms = SpectralMeasure::isotropic(64, 1.0).unwrap();
        let p = sample_znu_path(1.5, &atoms, 256, &mut key().rng()).unwrap();
        let PathRepr::Stieltjes { dy, .. } = &p.repr else { unreachable!() };
        assert!((p.value(0.0) - dy.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn pure_sine_lattice_g_vanishes_at_zero() {
        let spec = LimitSpec::new(
            LimitKind::GLattice { sigma1_sq: 1.0, sigma2_sq: 0.0, rho: 0.0 },
            Discretization::default(),
        )
        .unwrap();
        for r in 0..20 {
            let p = sample_path(&spec, StreamKey::new(1, r, Lane::LimitPath)).unwrap();
            assert_eq!(p.value(0.0), 0.0);
        }
    }

    #[test]
    fn covariance_examples() {
        let z = LimitSpec::z();
        assert_eq!(limit_covariance(&z, 0.4, 0.4).unwrap(), 1.0);
        let d = Discretization::default();
        let lat = LimitSpec::new(LimitKind::GLattice { sigma1_sq: 1.0, sigma2_sq: 1.0, rho: 0.0 }, d).unwrap();
        for &(a, b) in &[(0.0, 2.0), (1.0, 1.0), (-0.3, 2.2)] {
            assert!((limit_covariance(&lat, a, b).unwrap() - sinc(a - b)).abs() < 1e-15);
        }
        let sine = LimitSpec::new(LimitKind::GLattice { sigma1_sq: 1.0, sigma2_sq: 0.0, rho: 0.0 }, d).unwrap();
        for &t in &[0.2, 1.0, 3.0] {
            let v = limit_covariance(&sine, t, t).unwrap();
            assert!((v - 0.5 * (1.0 - sinc(2.0 * t))).abs() < 1e-15);
        }
        let rho = LimitSpec::new(LimitKind::GLattice { sigma1_sq: 1.0, sigma2_sq: 1.0, rho: 0.5 }, d).unwrap();
        assert_eq!(limit_covariance(&rho, 0.0, 0.0).unwrap(), 1.0);
        let znu = LimitSpec::new(
            LimitKind::Znu { alpha: 1.5, atoms: SpectralMeasure::isotropic(8, 1.0).unwrap() },
            d,
        )
        .unwrap();
        assert!(limit_covariance(&znu, 0.0, 1.0).is_err());
    }

    #[test]
    fn tilt_examples() {
        let pair = SpectralMeasure::new([
            SpectralAtom { angle: 0.0, weight: 0.5 },
            SpectralAtom { angle: PI, weight: 0.5 },
        ])
        .unwrap();
        let s = Angle::pi_fraction(1, 1).unwrap();
        assert_eq!(tilt_levy_measure(&pair, &s, 64).unwrap(), pair);

        let single = SpectralMeasure::new([SpectralAtom { angle: 0.0, weight: 1.0 }]).unwrap();
        let s = Angle::pi_fraction(2, 3).unwrap();
        let t = tilt_levy_measure(&single, &s, 64).unwrap();
        let angles: Vec<f64> = t.atoms().iter().map(|a| a.angle).collect();
        assert_eq!(angles.len(), 3);
        for (got, want) in angles.iter().zip([0.0, TAU / 3.0, 2.0 * TAU / 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(t.atoms().iter().all(|a| (a.weight - 1.0 / 3.0).abs() < 1e-15));

        let t = tilt_levy_measure(&pair, &Angle::Radians(1.0), 64).unwrap();
        assert_eq!(t.atoms().len(), 64);
        assert!(t.atoms().iter().all(|a| (a.weight - 1.0 / 64.0).abs() < 1e-15));

        let s = Angle::pi_fraction(1, 97).unwrap();
        assert!(matches!(tilt_levy_measure(&pair, &s, 64), Err(Error::RationalOverflow { .. })));
    }

    #[test]
    fn charfn_exponent_at_zero_time() {
        // t = 0: |sin φ|^α per atom
        let atoms = SpectralMeasure::new([
            SpectralAtom { angle: FRAC_PI_2, weight: 0.5 },
            SpectralAtom { angle: 3.0 * FRAC_PI_2, weight: 0.5 },
        ])
        .unwrap();
        assert!((znu_log_charfn(1.5, &atoms, 0.0, 2.0) + 2f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn truncation_within_bound() {
        for &k in &[64usize, 512] {
            for &t in &[0.0, 0.5, 1.7, 2.0, 10.0] {
                let bound = cardinal_truncation_bound(k, t).unwrap();
                let deficit = cardinal_variance_deficit(k, t);
                assert!(deficit >= -1e-12 && deficit <= bound, "K={k} t={t}");
            }
        }
        assert!(check_truncation(512, 0.0, 2.0).is_ok());
        assert!(cardinal_truncation_bound(64, 200.0).is_none());
    }

    #[test]
    fn window_matches_pointwise_for_each_kind() {
        let d = Discretization::default();
        let specs = [
            LimitSpec::z(),
            LimitSpec::new(LimitKind::GGeneric { sigma1_sq: 2.0, sigma2_sq: 0.5, rho: 0.1 }, d).unwrap(),
            LimitSpec::new(LimitKind::GLattice { sigma1_sq: 1.0, sigma2_sq: 0.0, rho: 0.0 }, d).unwrap(),
            LimitSpec::new(
                LimitKind::Znu { alpha: 1.2, atoms: SpectralMeasure::isotropic(16, 1.0).unwrap() },
                Discretization { cutoff: 512, steps: 256 },
            )
            .unwrap(),
        ];
        for spec in &specs {
            let p = sample_path(spec, key()).unwrap();
            let w = p.window(-1.0, 5.0);
            let scale = (0..=60).map(|i| p.value(-1.0 + 0.1 * i as f64).abs()).fold(0.0, f64::max);
            for i in 0..=60 {
                let t = -1.0 + 0.1 * i as f64;
                assert!((w.value(t) - p.value(t)).abs() <= 1e-11 * scale.max(1.0), "{} t={t}", spec.label());
                assert!(
                    (w.derivative(t) - p.derivative(t)).abs() <= 1e-10 * scale.max(1.0),
                    "{} t={t}",
                    spec.label()
                );
            }
        }
    }

    #[test]
    fn cholesky_grid_sampler_runs() {
        let ts: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
        let v = sample_z_grid_cholesky(&ts, &mut key().rng()).unwrap();
        assert_eq!(v.len(), 20);
    }
}
