//! Fabrication-noise studies: perturbing star couplers and masks, measuring
//! the accuracy loss, and recovering it by retraining.

mod fidelity;
mod inject;
mod retrain;
mod sweep;

pub use fidelity::{fidelity_accuracy_sweep, write_fidelity_accuracy_csv, FidelityAccuracyRow};
pub use inject::{inject, NoiseKind, NoiseSampler, NoiseSpec, NoiseTarget};
pub use retrain::{retrain, retrain_spec, set_scope, RetrainScope};
pub use sweep::{
    bias_noise_sweep, degradation_sweep, derive_seed, mean_std, write_bias_noise_csv, write_degradation_csv,
    BiasNoiseRow, DegradationRow,
};
