//! Structured experiment configuration shared by every CLI subcommand.
//!
//! The file is TOML. Every section is optional and falls back to defaults;
//! unknown keys are rejected. Example:
//!
//! ```toml
//! seed = 7
//!
//! [optics]
//! wavelength_m = 1.55e-6
//! slab_index = 2.85
//! mode_width_m = 5.0e-7
//!
//! [coupler]
//! ports = 21
//! radius_m = 3.409e-4
//!
//! [network]
//! preset = "pcnn-112-16"
//!
//! [train]
//! epochs = 10
//! train_subset = 10000
//! test_subset = 2000
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseTarget, RetrainScope};
use crate::optics::{FootprintModel, ParaxialPolicy, QuadratureSpec, SlabOptics};
use crate::trainer::{NetworkConfig, TrainSpec};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub optics: Option<SlabOptics>,
    pub coupler: CouplerConfig,
    pub quadrature: QuadratureSpec,
    pub paraxial: ParaxialPolicy,
    pub sweep: SweepConfig,
    pub network: NetworkConfig,
    pub train: TrainSpec,
    pub data: DataConfig,
    pub noise: NoiseConfig,
    pub retrain: RetrainConfig,
    pub footprint: FootprintConfig,
    pub gradcheck: GradcheckConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn slab_optics(&self) -> SlabOptics {
        self.optics.unwrap_or_default()
    }

    /// Pushes the top-level seed into every seeded section.
    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.network.seed = seed;
        self.train.seed = seed;
        self.noise.seed = seed;
        self.retrain.seed = seed;
        self.gradcheck.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(o) = &self.optics {
            o.validate()?;
        }
        self.quadrature.validate()?;
        self.train.validate()?;
        self.coupler.validate()?;
        if self.sweep.steps < 2 {
            return Err(Error::InvalidConfig("sweep.steps must be >= 2".into()));
        }
        if self.noise.instances < 2 {
            return Err(Error::InvalidConfig("noise.instances must be >= 2".into()));
        }
        if self.noise.targets.is_empty() {
            return Err(Error::EmptyNoiseTargets);
        }
        Ok(())
    }
}

/// Star-coupler geometry for `design`. Give either `radius_m` or
/// `theta_n0_deg`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplerConfig {
    pub ports: usize,
    /// Output ports; defaults to `ports`.
    pub outputs: Option<usize>,
    pub radius_m: Option<f64>,
    pub theta_n0_deg: Option<f64>,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        Self {
            ports: 21,
            outputs: None,
            radius_m: Some(340.9e-6),
            theta_n0_deg: None,
        }
    }
}

impl CouplerConfig {
    pub fn validate(&self) -> Result<()> {
        match (self.radius_m, self.theta_n0_deg) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "coupler: give radius_m or theta_n0_deg, not both".into(),
            )),
            (None, None) => Err(Error::InvalidConfig("coupler: radius_m or theta_n0_deg is required".into())),
            _ => Ok(()),
        }
    }
}

/// Ranges for the radius trade-off sweep (`design --sweep`) and the
/// fidelity/accuracy sweep (`sweep`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub ports: usize,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub steps: usize,
    /// Edge angles for the fidelity/accuracy sweep.
    pub accuracy_thetas_deg: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ports: 64,
            theta_min_deg: 5.0,
            theta_max_deg: 15.0,
            steps: 11,
            accuracy_thetas_deg: vec![5.0, 10.0, 15.0],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Directory holding the four IDX files; falls back to the
    /// `PHOTOCONV_DATA_DIR` environment variable, then `./data/mnist`.
    pub dir: Option<PathBuf>,
    /// Accept splits of non-standard size.
    pub allow_nonstandard_size: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub sigmas: Vec<f64>,
    pub kinds: Vec<NoiseKind>,
    pub targets: Vec<NoiseTarget>,
    pub instances: usize,
    pub seed: u64,
    /// Widths for the bias-noise sweep (networks with trainable biases).
    pub bias_deltas: Vec<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 0.01, 0.02, 0.05, 0.1],
            kinds: vec![NoiseKind::Phase, NoiseKind::Amplitude, NoiseKind::Complex],
            targets: vec![NoiseTarget::StarMatrices, NoiseTarget::FilterMasks],
            instances: 5,
            seed: 0,
            bias_deltas: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrainConfig {
    pub scope: RetrainScope,
    pub sigma: f64,
    pub kind: NoiseKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for RetrainConfig {
    fn default() -> Self {
        Self {
            scope: RetrainScope::Full,
            sigma: 0.05,
            kind: NoiseKind::Phase,
            epochs: 10,
            batch_size: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FootprintConfig {
    pub ports: usize,
    pub model: FootprintModel,
}

impl Default for FootprintConfig {
    fn default() -> Self {
        Self {
            ports: 256,
            model: FootprintModel::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckConfig {
    pub step: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            step: 1e-6,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}
