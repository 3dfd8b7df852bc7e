//! Benchmark fixtures shared by the criterion targets.

use photoconv_core::trainer::{build_network, Dataset, NetworkConfig};
use photoconv_core::Result;

/// Deterministic pseudo-images in `[0, 1)` with cycling labels.
pub fn synthetic_dataset(samples: usize, width: usize, classes: usize) -> Dataset {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let values = (0..samples * width)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    let labels = (0..samples).map(|i| (i % classes) as u8).collect();
    Dataset::new(width, classes, values, labels).expect("consistent synthetic dataset")
}

/// The default small photonic network.
pub fn small_network() -> Result<photoconv_core::layers::Network> {
    build_network(&NetworkConfig::preset("pcnn-112-16"))
}
