//! Data ingestion, architecture presets and the training loop.

mod adam;
mod dataset;
mod evaluate;
mod idx;
mod presets;
mod train;

pub use adam::{Adam, AdamConfig};
pub use dataset::{idx_path, load_mnist, load_split, Dataset, Split, CLASSES, PIXELS};
pub use evaluate::{evaluate, Evaluation};
pub use idx::{encode_idx_images, encode_idx_labels, load_idx, IdxKind, IdxPart, IMAGES_MAGIC, LABELS_MAGIC};
pub use presets::{
    analytic_parameter_count, build_network, is_scale_invariant, InitSpec, LayerSpec, NetworkConfig, OpticsMode,
    PhaseInit, Preset,
};
pub use train::{calibrate_output_scale, train, write_report_csv, EpochRecord, TrainReport, TrainSpec, REPORT_HEADER};
