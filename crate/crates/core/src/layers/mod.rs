//! Photonic network layers built from transfer matrices and tape primitives.
//!
//! A convolution layer is the 4f arrangement star coupler, diagonal mask,
//! star coupler. Pooling happens inside the first coupler by keeping only the
//! central (low-frequency) output ports. The second coupler's index reversal
//! is left in place; subsequent trainable stages absorb it.

mod activation;
mod layer;
mod mask;
mod network;
mod svd;

pub use activation::{ActivationKind, ActivationSpec, BiasKind};
pub use layer::{conv_forward, fc_forward, pool, ConvolutionLayer, DiffractiveLayer, FullyConnectedLayer, Layer};
pub use mask::FilterMask;
pub use network::{Network, SampleOutcome};
pub use svd::{svd_check, SvdFactorization};
