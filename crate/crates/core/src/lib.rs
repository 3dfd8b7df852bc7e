//! Simulation and training toolkit for photonic convolutional neural networks
//! whose convolutions are carried out by star-coupler discrete Fourier
//! transforms.
//!
//! The crate is organised bottom-up:
//!
//! * [`optics`]: centered DFT matrices, star-coupler coupling matrices
//!   obtained by scalar-diffraction quadrature, fidelity/transmission metrics,
//!   the radius trade-off sweep and footprint arithmetic.
//! * [`autograd`]: a small reverse-mode tape over complex vectors with
//!   real-valued trainable parameters.
//! * [`layers`]: Fourier-domain convolution, spectral pooling, modReLU
//!   activations, real fully-connected layers and the SVD realisation check.
//! * [`trainer`]: IDX ingestion, architecture presets, Adam training loop,
//!   evaluation and checkpointing.
//! * [`noise`]: multiplicative noise injection, degradation sweeps and
//!   retraining of noisy networks.
//! * [`config`]: the structured experiment configuration shared with the CLI.

pub mod autograd;
pub mod config;
pub mod error;
pub mod layers;
pub mod linalg;
pub mod noise;
pub mod optics;
pub mod trainer;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use num_complex::Complex64;

mod fmt {
    /// 17 significant digits, enough to round-trip any `f64`.
    pub(crate) fn full(x: f64) -> String {
        format!("{x:.16e}")
    }
}
