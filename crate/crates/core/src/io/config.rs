//! Run configuration read from TOML.
//!
//! Every table is optional and every key has a default. Unknown keys are
//! rejected so that typos surface as configuration errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifierConfig;
use crate::error::Error;
use crate::integrate::IntegratorConfig;
use crate::kamscan::ScanConfig;
use crate::sections::SectionConfig;
use crate::systems::pendulum::PendulumParams;
use crate::systems::satellite::{SatelliteForm, SatelliteParams, SatelliteState};

use super::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    #[default]
    Pendulum,
    Satellite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumConfig {
    pub lengths: [f64; 3],
    pub masses: [f64; 3],
    pub eps: [f64; 2],
    pub gravity: f64,
    /// Absolute segment angles of the first attempt; drawn at random when absent.
    pub angles: Option<[f64; 3]>,
    pub angular_velocities: Option<[f64; 3]>,
    /// Bound on randomly drawn angular velocities.
    pub velocity_scale: f64,
}

impl Default for PendulumConfig {
    fn default() -> Self {
        let p = PendulumParams::default();
        Self {
            lengths: p.lengths,
            masses: p.masses,
            eps: p.eps,
            gravity: p.gravity,
            angles: None,
            angular_velocities: None,
            velocity_scale: 1.0,
        }
    }
}

impl PendulumConfig {
    pub fn params(&self) -> PendulumParams {
        PendulumParams {
            lengths: self.lengths,
            masses: self.masses,
            eps: self.eps,
            gravity: self.gravity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatelliteConfig {
    pub alpha: f64,
    pub beta: f64,
    pub form: SatelliteForm,
    /// `(psi, theta, p_psi, p_theta)` of the first attempt.
    pub initial: [f64; 4],
    /// Later attempts perturb `initial` by up to this much per coordinate.
    pub spread: f64,
}

impl Default for SatelliteConfig {
    fn default() -> Self {
        let p = SatelliteParams::default();
        Self {
            alpha: p.alpha,
            beta: p.beta,
            form: p.form,
            initial: SatelliteState::reference_point().to_array(),
            spread: 0.02,
        }
    }
}

impl SatelliteConfig {
    pub fn params(&self) -> SatelliteParams {
        SatelliteParams {
            alpha: self.alpha,
            beta: self.beta,
            form: self.form,
        }
    }
}

/// Settings of the `section` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionRunConfig {
    pub slab_halfwidth: f64,
    pub max_points: usize,
    /// Initial conditions to try before giving up on finding curves.
    pub attempts: usize,
}

impl Default for SectionRunConfig {
    fn default() -> Self {
        let s = SectionConfig::default();
        Self {
            slab_halfwidth: s.slab_halfwidth,
            max_points: s.max_points,
            attempts: 1,
        }
    }
}

impl SectionRunConfig {
    pub fn section(&self) -> SectionConfig {
        SectionConfig {
            slab_halfwidth: self.slab_halfwidth,
            max_points: self.max_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemKind,
    pub seed: u64,
    /// Write every n-th accepted step with `--dump` (0 behaves like 1).
    pub dump_stride: usize,
    pub pendulum: PendulumConfig,
    pub satellite: SatelliteConfig,
    pub integrator: IntegratorConfig,
    pub section: SectionRunConfig,
    pub classifier: ClassifierConfig,
    pub scan: ScanConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config, or the config echoed in a run manifest when the
    /// file has a `.json` extension.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: RunManifest =
                serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            m.config.validate()?;
            return Ok(m.config);
        }
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let field = |name: &'static str| move |e: Error| ConfigError(format!("{name}: {e}"));
        self.integrator.validate().map_err(field("integrator"))?;
        self.classifier.validate().map_err(field("classifier"))?;
        self.scan.validate().map_err(field("scan"))?;
        if !(self.section.slab_halfwidth.is_finite() && self.section.slab_halfwidth > 0.0) {
            return Err(ConfigError("section.slab_halfwidth must be > 0".into()));
        }
        if self.section.attempts == 0 {
            return Err(ConfigError("section.attempts must be >= 1".into()));
        }
        match self.system {
            SystemKind::Pendulum => self.pendulum.params().validate().map_err(field("pendulum"))?,
            SystemKind::Satellite => self.satellite.params().validate().map_err(field("satellite"))?,
        }
        if !(self.pendulum.velocity_scale.is_finite() && self.pendulum.velocity_scale >= 0.0) {
            return Err(ConfigError("pendulum.velocity_scale must be >= 0".into()));
        }
        if !(self.satellite.spread.is_finite() && self.satellite.spread >= 0.0) {
            return Err(ConfigError("satellite.spread must be >= 0".into()));
        }
        Ok(())
    }

    /// Applies a `--seed` override to both the run and the scan.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
            self.scan.seed = s;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);
