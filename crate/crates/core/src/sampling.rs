//! Coefficient ensembles `(ξ_k, η_k)` and their normalizing sequences.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Atom count used to represent an isotropic spectral measure.
pub const ISOTROPIC_ATOMS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalFamily {
    Gaussian,
    Rademacher,
    Uniform,
    CenteredExponential,
}

impl MarginalFamily {
    /// Zero-mean, unit-variance draw.
    fn standardized<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            MarginalFamily::Gaussian => rng.sample(StandardNormal),
            MarginalFamily::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            MarginalFamily::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            MarginalFamily::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralAtom {
    /// Direction on the unit circle, in `[0, 2π)`.
    pub angle: f64,
    pub weight: f64,
}

/// Discrete finite measure on the unit circle.
///
/// Weights are in the characteristic-exponent convention: a stable vector `X`
/// with this spectral measure satisfies
/// `E exp(i⟨θ, X⟩) = exp(-Σ w |⟨θ, e(φ)⟩|^α)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralInput", into = "Vec<SpectralAtom>")]
pub struct SpectralMeasure {
    atoms: Vec<SpectralAtom>,
}

const ANGLE_MERGE_TOL: f64 = 1e-12;

fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if TAU - w < ANGLE_MERGE_TOL {
        0.0
    } else {
        w
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl SpectralMeasure {
    /// Atoms are wrapped into `[0, 2π)` and merged when they coincide.
    pub fn new(atoms: impl IntoIterator<Item = SpectralAtom>) -> Result<Self> {
        let mut merged: Vec<SpectralAtom> = Vec::new();
        for atom in atoms {
            if !(atom.weight > 0.0) || !atom.weight.is_finite() || !atom.angle.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "spectral atom needs finite angle and positive weight, got {atom:?}"
                )));
            }
            let angle = wrap_angle(atom.angle);
            match merged
                .iter_mut()
                .find(|a| angle_distance(a.angle, angle) < ANGLE_MERGE_TOL)
            {
                Some(existing) => existing.weight += atom.weight,
                None => merged.push(SpectralAtom {
                    angle,
                    weight: atom.weight,
                }),
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidModel("spectral measure has no atoms".into()));
        }
        merged.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        Ok(Self { atoms: merged })
    }

    /// `count` equally spaced atoms starting at angle 0.
    pub fn isotropic(count: usize, total_weight: f64) -> Result<Self> {
        if count == 0 || count % 2 == 1 {
            return Err(Error::InvalidModel(
                "isotropic atom count must be even and positive".into(),
            ));
        }
        let w = total_weight / count as f64;
        Self::new((0..count).map(|k| SpectralAtom {
            angle: TAU * k as f64 / count as f64,
            weight: w,
        }))
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Closed under `φ ↦ φ + π` with equal weights.
    pub fn is_symmetric(&self) -> bool {
        self.atoms.iter().all(|a| {
            self.atoms.iter().any(|b| {
                angle_distance(b.angle, a.angle + PI) < 1e-9
                    && (b.weight - a.weight).abs() <= 1e-12 * a.weight.max(b.weight)
            })
        })
    }

    /// One entry per antipodal pair: `(angle in [0, π), combined weight)`.
    pub fn axes(&self) -> Vec<(f64, f64)> {
        let mut axes: Vec<(f64, f64)> = Vec::new();
        for a in &self.atoms {
            let phi = if a.angle >= PI - ANGLE_MERGE_TOL && a.angle < TAU {
                wrap_angle(a.angle - PI)
            } else {
                a.angle
            };
            let phi = if (PI - phi).abs() < ANGLE_MERGE_TOL { 0.0 } else { phi };
            match axes.iter_mut().find(|(p, _)| angle_distance(*p, phi) < 1e-9) {
                Some((_, w)) => *w += a.weight,
                None => axes.push((phi, a.weight)),
            }
        }
        axes.sort_by(|x, y| x.0.total_cmp(&y.0));
        axes
    }
}

/// Config form: an explicit atom list or `{ isotropic = 64, total_weight = 1.0 }`.
#[derive(Deserialize)]
#[serde(untagged)]
enum SpectralInput {
    Atoms(Vec<SpectralAtom>),
    Isotropic { isotropic: usize, total_weight: f64 },
}

impl TryFrom<SpectralInput> for SpectralMeasure {
    type Error = Error;
    fn try_from(input: SpectralInput) -> Result<Self> {
        match input {
            SpectralInput::Atoms(atoms) => Self::new(atoms),
            SpectralInput::Isotropic {
                isotropic,
                total_weight,
            } => Self::isotropic(isotropic, total_weight),
        }
    }
}

impl From<SpectralMeasure> for Vec<SpectralAtom> {
    fn from(m: SpectralMeasure) -> Self {
        m.atoms
    }
}

/// Lévy measure of a two-dimensional symmetric α-stable law, given through
/// its spectral measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasureSpec {
    pub alpha: f64,
    pub spectral: SpectralMeasure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    FiniteVariance {
        family: MarginalFamily,
        sigma1_sq: f64,
        sigma2_sq: f64,
        rho: f64,
    },
    ExactStable {
        alpha: f64,
        spectral: SpectralMeasure,
    },
    /// `P(|ξ| > x) = min(1, c x^{-α})`, ξ and η independent and symmetric.
    ParetoTail { alpha: f64, tail_constant: f64 },
}

/// Validated distribution of the i.i.d. pairs `(ξ_k, η_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelKind", into = "ModelKind")]
pub struct CoefficientModel {
    kind: ModelKind,
}

impl TryFrom<ModelKind> for CoefficientModel {
    type Error = Error;
    fn try_from(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::FiniteVariance {
                family,
                sigma1_sq,
                sigma2_sq,
                rho,
            } => Self::finite_variance(family, sigma1_sq, sigma2_sq, rho),
            ModelKind::ExactStable { alpha, spectral } => Self::exact_stable(alpha, spectral),
            ModelKind::ParetoTail {
                alpha,
                tail_constant,
            } => Self::pareto_tail(alpha, tail_constant),
        }
    }
}

impl From<CoefficientModel> for ModelKind {
    fn from(m: CoefficientModel) -> Self {
        m.kind
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("alpha must lie in (0, 2), got {alpha}")))
    }
}

impl CoefficientModel {
    pub fn finite_variance(
        family: MarginalFamily,
        sigma1_sq: f64,
        sigma2_sq: f64,
        rho: f64,
    ) -> Result<Self> {
        if !(sigma1_sq >= 0.0 && sigma2_sq >= 0.0 && rho.is_finite())
            || !(sigma1_sq + sigma2_sq > 0.0)
            || !(sigma1_sq + sigma2_sq).is_finite()
        {
            return Err(Error::InvalidModel(format!(
                "variances must be nonnegative with positive sum, got ({sigma1_sq}, {sigma2_sq})"
            )));
        }
        if rho.abs() > (sigma1_sq * sigma2_sq).sqrt() * (1.0 + 1e-12) {
            return Err(Error::InvalidModel(format!(
                "|rho| = {} exceeds sqrt(sigma1_sq * sigma2_sq)",
                rho.abs()
            )));
        }
        Ok(Self {
            kind: ModelKind::FiniteVariance {
                family,
                sigma1_sq,
                sigma2_sq,
                rho,
            },
        })
    }

    /// Unit covariance with the given marginal family.
    pub fn standard(family: MarginalFamily) -> Self {
        Self::finite_variance(family, 1.0, 1.0, 0.0).expect("unit covariance is valid")
    }

    pub fn exact_stable(alpha: f64, spectral: SpectralMeasure) -> Result<Self> {
        check_alpha(alpha)?;
        if !spectral.is_symmetric() {
            return Err(Error::InvalidModel(
                "exact stable models need a spectral measure closed under φ ↦ φ + π".into(),
            ));
        }
        Ok(Self {
            kind: ModelKind::ExactStable { alpha, spectral },
        })
    }

    /// Exact stable model with the default dense isotropic atom set.
    pub fn isotropic_stable(alpha: f64, total_weight: f64) -> Result<Self> {
        Self::exact_stable(alpha, SpectralMeasure::isotropic(ISOTROPIC_ATOMS, total_weight)?)
    }

    pub fn pareto_tail(alpha: f64, tail_constant: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(tail_constant > 0.0 && tail_constant.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "tail constant must be positive, got {tail_constant}"
            )));
        }
        Ok(Self {
            kind: ModelKind::ParetoTail {
                alpha,
                tail_constant,
            },
        })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            ModelKind::FiniteVariance { .. } => None,
            ModelKind::ExactStable { alpha, .. } | ModelKind::ParetoTail { alpha, .. } => Some(alpha),
        }
    }

    pub fn is_unit_covariance(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::FiniteVariance { sigma1_sq, sigma2_sq, rho, .. }
                if sigma1_sq == 1.0 && sigma2_sq == 1.0 && rho == 0.0
        )
    }

    /// Short label used in provenance records.
    pub fn label(&self) -> String {
        match &self.kind {
            ModelKind::FiniteVariance {
                family,
                sigma1_sq,
                sigma2_sq,
                rho,
            } => format!("finite_variance:{family:?}:{sigma1_sq}:{sigma2_sq}:{rho}").to_lowercase(),
            ModelKind::ExactStable { alpha, spectral } => {
                format!("exact_stable:{alpha}:{}atoms", spectral.atoms().len())
            }
            ModelKind::ParetoTail {
                alpha,
                tail_constant,
            } => format!("pareto_tail:{alpha}:{tail_constant}"),
        }
    }
}

/// `n` draws of `(ξ_k, η_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPairs {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub model_id: String,
    pub seed_path: Option<StreamKey>,
}

impl CoefficientPairs {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Symmetric square root of `[[a, b], [b, c]]` (positive semidefinite).
pub(crate) fn sqrt_psd_2x2(a: f64, b: f64, c: f64) -> [[f64; 2]; 2] {
    let det = (a * c - b * b).max(0.0);
    let s = det.sqrt();
    let t = (a + c + 2.0 * s).sqrt();
    [[(a + s) / t, b / t], [b / t, (c + s) / t]]
}

/// Standard symmetric α-stable variate, `E e^{iθS} = e^{-|θ|^α}`, by the
/// Chambers–Mallows–Stuck transform.
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = loop {
        let u = rng.random::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let v = PI * (u - 0.5);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    let av = alpha * v;
    (av.sin() / v.cos().powf(1.0 / alpha)) * ((v - av).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Symmetric Pareto variate with `P(|ξ| > x) = min(1, c x^{-α})`.
pub fn symmetric_pareto<R: Rng + ?Sized>(alpha: f64, c: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let r = if alpha == 1.0 {
        c / u
    } else {
        (c / u).powf(1.0 / alpha)
    };
    if rng.random::<bool>() {
        r
    } else {
        -r
    }
}

/// Per-axis sampling plan for an exact stable model.
pub(crate) struct StableAxes {
    alpha: f64,
    // (cos φ, sin φ, weight^{1/α})
    axes: Vec<(f64, f64, f64)>,
}

impl StableAxes {
    pub(crate) fn new(alpha: f64, spectral: &SpectralMeasure, weight_scale: f64) -> Self {
        let axes = spectral
            .axes()
            .into_iter()
            .map(|(phi, w)| {
                let (s, c) = phi.sin_cos();
                (c, s, (w * weight_scale).powf(1.0 / alpha))
            })
            .collect();
        Self { alpha, axes }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let (mut x, mut y) = (0.0, 0.0);
        for &(c, s, scale) in &self.axes {
            let v = scale * symmetric_stable(self.alpha, rng);
            x += c * v;
            y += s * v;
        }
        (x, y)
    }
}

/// Draws `n` i.i.d. coefficient pairs from `model`.
///
/// Symmetric antipodal atoms are sampled one axis at a time: two independent
/// atoms `(φ, w)` and `(φ+π, w)` contribute `(2w)^{1/α} S e(φ)` in law.
pub fn draw_coefficients<R: Rng + ?Sized>(
    model: &CoefficientModel,
    n: usize,
    rng: &mut R,
) -> CoefficientPairs {
    let mut xi = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    match model.kind() {
        &ModelKind::FiniteVariance {
            family,
            sigma1_sq,
            sigma2_sq,
            rho,
        } => {
            let m = sqrt_psd_2x2(sigma1_sq, rho, sigma2_sq);
            let diagonal = rho == 0.0;
            for _ in 0..n {
                let u = family.standardized(rng);
                let v = family.standardized(rng);
                if diagonal {
                    xi.push(m[0][0] * u);
                    eta.push(m[1][1] * v);
                } else {
                    xi.push(m[0][0] * u + m[0][1] * v);
                    eta.push(m[1][0] * u + m[1][1] * v);
                }
            }
        }
        ModelKind::ExactStable { alpha, spectral } => {
            let plan = StableAxes::new(*alpha, spectral, 1.0);
            for _ in 0..n {
                let (x, y) = plan.draw(rng);
                xi.push(x);
                eta.push(y);
            }
        }
        &ModelKind::ParetoTail {
            alpha,
            tail_constant,
        } => {
            for _ in 0..n {
                xi.push(symmetric_pareto(alpha, tail_constant, rng));
                eta.push(symmetric_pareto(alpha, tail_constant, rng));
            }
        }
    }
    CoefficientPairs {
        xi,
        eta,
        model_id: model.label(),
        seed_path: None,
    }
}

/// [`draw_coefficients`] on the stream named by `key`.
pub fn draw_coefficients_keyed(model: &CoefficientModel, n: usize, key: StreamKey) -> CoefficientPairs {
    let mut rng = key.rng();
    let mut pairs = draw_coefficients(model, n, &mut rng);
    pairs.seed_path = Some(key);
    pairs
}

/// `Γ(1-α) cos(πα/2)`, continuously extended by `π/2` at `α = 1`.
///
/// A symmetric law whose Lévy measure has two-sided tail `C r^{-α}` has
/// characteristic exponent `C · stable_tail_factor(α) · |θ|^α`.
pub fn stable_tail_factor(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-9 {
        FRAC_PI_2
    } else {
        statrs::function::gamma::gamma(1.0 - alpha) * (FRAC_PI_2 * alpha).cos()
    }
}

/// Normalizing sequence: `√n`, `n^{1/α}`, or `(c' n)^{1/α}`.
///
/// For the Pareto model `c' = c · stable_tail_factor(α)`, chosen so that the
/// normalized sums of each coordinate converge to a standard symmetric stable
/// law `e^{-|θ|^α}`. The limit spectral measure then has four atoms of
/// weight ½ on the coordinate axes.
pub fn normalizer(model: &CoefficientModel, n: usize) -> f64 {
    let n = n as f64;
    match *model.kind() {
        ModelKind::FiniteVariance { .. } => n.sqrt(),
        ModelKind::ExactStable { alpha, .. } => n.powf(1.0 / alpha),
        ModelKind::ParetoTail {
            alpha,
            tail_constant,
        } => (pareto_scale_constant(alpha, tail_constant) * n).powf(1.0 / alpha),
    }
}

/// The constant `c'` in the Pareto normalizer `(c' n)^{1/α}`.
pub fn pareto_scale_constant(alpha: f64, tail_constant: f64) -> f64 {
    tail_constant * stable_tail_factor(alpha)
}

/// Spectral description of the limit Lévy measure `ν` of a stable-domain model.
pub fn limit_levy_measure(model: &CoefficientModel) -> Result<LevyMeasureSpec> {
    match model.kind() {
        ModelKind::FiniteVariance { .. } => Err(Error::InvalidModel(
            "finite-variance models have no stable limit".into(),
        )),
        ModelKind::ExactStable { alpha, spectral } => Ok(LevyMeasureSpec {
            alpha: *alpha,
            spectral: spectral.clone(),
        }),
        &ModelKind::ParetoTail { alpha, .. } => Ok(LevyMeasureSpec {
            alpha,
            spectral: SpectralMeasure::new((0..4).map(|k| SpectralAtom {
                angle: FRAC_PI_2 * k as f64,
                weight: 0.5,
            }))?,
        }),
    }
}
