use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{FilterMask, Layer, Network};
use crate::optics::{Provenance, TransferMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `e^{iΔφ}` only.
    Phase,
    /// `a_δ` only.
    Amplitude,
    /// `a_δ e^{iΔφ}`.
    Complex,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Phase => "phase",
            NoiseKind::Amplitude => "amplitude",
            NoiseKind::Complex => "complex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    /// Every entry of every star-coupler matrix `F_k`.
    StarMatrices,
    /// Every diagonal entry of every filter mask `A_k`.
    FilterMasks,
}

/// Multiplicative fabrication noise: each targeted entry is multiplied by
/// `a_δ e^{iΔφ}` with `a_δ = clamp(1 - |δ|, 0, 1)`, `δ ~ N(0, σ^2)` and
/// `Δφ ~ N(0, (2πσ)^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub sigma: f64,
    #[serde(default = "default_targets")]
    pub targets: Vec<NoiseTarget>,
    pub kind: NoiseKind,
    #[serde(default)]
    pub seed: u64,
}

fn default_targets() -> Vec<NoiseTarget> {
    vec![NoiseTarget::StarMatrices, NoiseTarget::FilterMasks]
}

impl NoiseSpec {
    pub fn new(sigma: f64, kind: NoiseKind, seed: u64) -> Self {
        Self {
            sigma,
            targets: default_targets(),
            kind,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise sigma {} must be finite and >= 0", self.sigma)));
        }
        if self.targets.is_empty() {
            return Err(Error::EmptyNoiseTargets);
        }
        Ok(())
    }

    fn targets(&self, t: NoiseTarget) -> bool {
        self.targets.contains(&t)
    }
}

/// Draws noise factors for one [`NoiseSpec`].
pub struct NoiseSampler {
    kind: NoiseKind,
    amplitude: Normal<f64>,
    phase: Normal<f64>,
    rng: ChaCha8Rng,
}

impl NoiseSampler {
    pub fn new(sigma: f64, kind: NoiseKind, seed: u64) -> Result<Self> {
        let bad = |e: rand_distr::NormalError| Error::InvalidConfig(format!("noise sigma {sigma}: {e}"));
        Ok(Self {
            kind,
            amplitude: Normal::new(0.0, sigma).map_err(bad)?,
            phase: Normal::new(0.0, 2.0 * std::f64::consts::PI * sigma).map_err(bad)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// `a_δ = clamp(1 - |δ|, 0, 1)`.
    pub fn amplitude(&mut self) -> f64 {
        (1.0 - self.amplitude.sample(&mut self.rng).abs()).clamp(0.0, 1.0)
    }

    pub fn phase(&mut self) -> f64 {
        self.phase.sample(&mut self.rng)
    }

    pub fn factor(&mut self) -> Complex64 {
        match self.kind {
            NoiseKind::Phase => Complex64::from_polar(1.0, self.phase()),
            NoiseKind::Amplitude => Complex64::new(self.amplitude(), 0.0),
            NoiseKind::Complex => {
                let a = self.amplitude();
                Complex64::from_polar(a, self.phase())
            }
        }
    }
}

/// A copy of `network` with noise applied to the targeted optics. Fully
/// connected layers are never perturbed; the original is left untouched.
pub fn inject(network: &Network, spec: &NoiseSpec) -> Result<Network> {
    spec.validate()?;
    let mut sampler = NoiseSampler::new(spec.sigma, spec.kind, spec.seed)?;
    let mut noisy = network.clone();
    let matrices = spec.targets(NoiseTarget::StarMatrices);
    let masks = spec.targets(NoiseTarget::FilterMasks);
    for layer in &mut noisy.layers {
        match layer {
            Layer::Convolution(c) => {
                if matrices {
                    perturb_matrix(&mut c.f_in, &mut sampler);
                }
                if masks {
                    perturb_mask(&mut c.mask, &mut sampler);
                }
                if matrices {
                    perturb_matrix(&mut c.f_out, &mut sampler);
                }
            }
            Layer::Diffractive(d) => {
                if matrices {
                    perturb_matrix(&mut d.transform, &mut sampler);
                }
                if masks {
                    perturb_mask(&mut d.mask, &mut sampler);
                }
            }
            Layer::Transform(t) => {
                if matrices {
                    perturb_matrix(t, &mut sampler);
                }
            }
            Layer::FullyConnected(_) => {}
        }
    }
    Ok(noisy)
}

fn perturb_matrix(m: &mut TransferMatrix, sampler: &mut NoiseSampler) {
    let mut entries = (*m.entries).clone();
    entries.iter_mut().for_each(|z| *z *= sampler.factor());
    m.entries = Arc::new(entries);
    m.provenance = Provenance::Perturbed(Box::new(m.provenance.clone()));
}

fn perturb_mask(mask: &mut FilterMask, sampler: &mut NoiseSampler) {
    let factors: Vec<Complex64> = match &mask.perturbation {
        Some(existing) => existing.iter().map(|z| z * sampler.factor()).collect(),
        None => (0..mask.len).map(|_| sampler.factor()).collect(),
    };
    mask.perturbation = Some(Arc::new(factors));
}
