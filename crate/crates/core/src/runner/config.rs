//! Experiment configuration files.
//!
//! A config is TOML with the sections `[model]`, `[window]`, `[limit]`,
//! `[scan]` and `[run]`; unknown keys are rejected. See `README.md` for the
//! full key list.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angle::{Angle, DEFAULT_Q_MAX};
use crate::error::{Error, Result};
use crate::limitproc::{check_truncation, tilt_levy_measure, Discretization, LimitKind, LimitSpec, DEFAULT_CUTOFF, DEFAULT_STEPS};
use crate::rootfind::ScanOptions;
use crate::sampling::{limit_levy_measure, CoefficientModel, ModelKind};

/// How the window center `s_n` depends on the degree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterRule {
    /// `s_n = s`.
    #[default]
    Fixed,
    /// `s_n = s + c/n²` with `s ∈ πℤ`, so `n |s_n - s| → 0`.
    LatticeApproach,
    /// `s_n = s + c ln(n)/n`, so `n · dist(s_n, πℤ) → ∞` when `s ∈ πℤ`.
    Escape,
}

fn one() -> f64 {
    1.0
}

/// Observation window `[s_n + a/n, s_n + b/n]`, in local coordinates `[a, b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub center: Angle,
    #[serde(default)]
    pub rule: CenterRule,
    /// The constant `c` of the center rule.
    #[serde(default = "one")]
    pub rate: f64,
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl WindowSpec {
    pub fn fixed(center: Angle, a: f64, b: f64, n: usize) -> Self {
        Self {
            center,
            rule: CenterRule::Fixed,
            rate: 1.0,
            a,
            b,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.b) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidWindow(format!("need finite a < b, got [{}, {}]", self.a, self.b)));
        }
        if self.n == 0 {
            return Err(Error::InvalidWindow("degree n must be at least 1".into()));
        }
        if !self.center.radians().is_finite() || !self.rate.is_finite() {
            return Err(Error::InvalidWindow("center and rate must be finite".into()));
        }
        if self.rule == CenterRule::LatticeApproach && !self.center.on_pi_lattice() {
            return Err(Error::InvalidWindow(format!(
                "lattice_approach needs a center in πℤ, got {}",
                self.center
            )));
        }
        Ok(())
    }

    /// The center `s_n` used at degree `n`.
    pub fn center_at(&self) -> f64 {
        let s = self.center.radians();
        let n = self.n as f64;
        match self.rule {
            CenterRule::Fixed => s,
            CenterRule::LatticeApproach => s + self.rate / (n * n),
            CenterRule::Escape => s + self.rate * n.ln() / n,
        }
    }

    /// Whether the Gaussian limit is the lattice one.
    fn lattice_regime(&self) -> bool {
        match self.rule {
            CenterRule::Fixed => self.center.on_pi_lattice(),
            CenterRule::LatticeApproach => true,
            CenterRule::Escape => false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitChoice {
    /// Chosen from the model and the window center.
    #[default]
    Auto,
    Z,
    GGeneric,
    GLattice,
    Znu,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    pub kind: LimitChoice,
    pub cutoff: usize,
    pub steps: usize,
    /// Largest denominator treated as rational in the tilt.
    pub q_max: u64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            kind: LimitChoice::Auto,
            cutoff: DEFAULT_CUTOFF,
            steps: DEFAULT_STEPS,
            q_max: DEFAULT_Q_MAX,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

fn default_outputs() -> Vec<OutputFormat> {
    vec![OutputFormat::Json]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment_id: String,
    pub replicas: u64,
    pub master_seed: u64,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputFormat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: CoefficientModel,
    pub window: WindowSpec,
    #[serde(default)]
    pub limit: LimitConfig,
    #[serde(default)]
    pub scan: ScanOptions,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every section and resolves the limit process.
    pub fn validate(&self) -> Result<LimitSpec> {
        self.window.validate()?;
        self.scan.validate()?;
        if self.run.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        resolve_limit(&self.model, &self.window, &self.limit)
    }
}

/// The limit process to compare against.
///
/// `auto` picks `Z` for unit covariance, the generic or lattice `G` for other
/// finite-variance models depending on whether the center lies in `πℤ`, and
/// `Z_ν` with the tilted Lévy measure for stable models.
pub fn resolve_limit(model: &CoefficientModel, window: &WindowSpec, cfg: &LimitConfig) -> Result<LimitSpec> {
    let disc = Discretization {
        cutoff: cfg.cutoff,
        steps: cfg.steps,
    };
    let gaussian = |lattice: bool| -> Result<LimitKind> {
        match *model.kind() {
            ModelKind::FiniteVariance {
                sigma1_sq,
                sigma2_sq,
                rho,
                ..
            } => Ok(if lattice {
                LimitKind::GLattice {
                    sigma1_sq,
                    sigma2_sq,
                    rho,
                }
            } else {
                LimitKind::GGeneric {
                    sigma1_sq,
                    sigma2_sq,
                    rho,
                }
            }),
            _ => Err(Error::InvalidLimit("a G limit needs a finite-variance model".into())),
        }
    };
    let stable = || -> Result<LimitKind> {
        if window.rule == CenterRule::Escape {
            return Err(Error::InvalidLimit(
                "the stable limit is not defined for the escape center rule".into(),
            ));
        }
        let nu = limit_levy_measure(model)?;
        Ok(LimitKind::Znu {
            alpha: nu.alpha,
            atoms: tilt_levy_measure(&nu.spectral, &window.center, cfg.q_max)?,
        })
    };
    let kind = match cfg.kind {
        LimitChoice::Auto => match model.kind() {
            ModelKind::FiniteVariance { .. } if model.is_unit_covariance() => LimitKind::Z,
            ModelKind::FiniteVariance { .. } => gaussian(window.lattice_regime())?,
            _ => stable()?,
        },
        LimitChoice::Z => LimitKind::Z,
        LimitChoice::GGeneric => gaussian(false)?,
        LimitChoice::GLattice => gaussian(true)?,
        LimitChoice::Znu => stable()?,
    };
    if matches!(kind, LimitKind::Z | LimitKind::GGeneric { .. }) {
        check_truncation(cfg.cutoff, window.a, window.b)?;
    }
    LimitSpec::new(kind, disc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[model]
kind = "finite_variance"
family = "gaussian"
sigma1_sq = 1.0
sigma2_sq = 1.0
rho = 0.0

[window]
center = 1.0
a = 0.0
b = 2.0
n = 500

[run]
experiment_id = "basic"
replicas = 10
master_seed = 7
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(c.scan, ScanOptions::default());
        assert_eq!(c.limit, LimitConfig::default());
        assert_eq!(c.run.outputs, vec![OutputFormat::Json]);
        assert_eq!(c.validate().unwrap().kind(), &LimitKind::Z);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = BASIC.replace("n = 500", "n = 500\nwidth = 3");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        let bad = BASIC.replace("rho = 0.0", "rho = 0.0\nmu = 1.0");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        let bad = format!("{BASIC}\n[extra]\nx = 1\n");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn invalid_model_rejected_at_parse() {
        let bad = BASIC.replace("rho = 0.0", "rho = 2.0");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn pi_fraction_center() {
        let text = BASIC
            .replace("center = 1.0", "center = \"0/1*pi\"")
            .replace("sigma2_sq = 1.0", "sigma2_sq = 0.0");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert!(matches!(c.validate().unwrap().kind(), LimitKind::GLattice { .. }));
        let text = BASIC.replace("sigma2_sq = 1.0", "sigma2_sq = 0.0");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert!(matches!(c.validate().unwrap().kind(), LimitKind::GGeneric { .. }));
    }

    #[test]
    fn stable_model_resolves_to_tilted_znu() {
        let text = BASIC.replace(
            "kind = \"finite_variance\"\nfamily = \"gaussian\"\nsigma1_sq = 1.0\nsigma2_sq = 1.0\nrho = 0.0",
            "kind = \"exact_stable\"\nalpha = 1.5\nspectral = { isotropic = 64, total_weight = 1.0 }",
        );
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        match c.validate().unwrap().kind() {
            LimitKind::Znu { alpha, atoms } => {
                assert_eq!(*alpha, 1.5);
                assert_eq!(atoms.atoms().len(), 64);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_toml_str(BASIC).unwrap();
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn center_rules() {
        let mut w = WindowSpec::fixed(Angle::pi_fraction(1, 1).unwrap(), 0.0, 2.0, 100);
        w.rule = CenterRule::LatticeApproach;
        w.rate = 2.0;
        assert!((w.center_at() - (std::f64::consts::PI + 2e-4)).abs() < 1e-15);
        w.rule = CenterRule::Escape;
        assert!((w.center_at() - (std::f64::consts::PI + 2.0 * 100f64.ln() / 100.0)).abs() < 1e-15);
        let off = WindowSpec {
            rule: CenterRule::LatticeApproach,
            ..WindowSpec::fixed(Angle::Radians(1.0), 0.0, 2.0, 100)
        };
        assert!(off.validate().is_err());
        assert!(WindowSpec::fixed(Angle::Radians(1.0), 2.0, 2.0, 100).validate().is_err());
    }
}
