use std::path::PathBuf;

use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),

    #[error("waveguide angle {angle_deg:.4} deg exceeds the paraxial limit of {limit_deg} deg")]
    ParaxialLimit { angle_deg: f64, limit_deg: f64 },

    #[error("quadrature did not converge: coarse estimate {coarse}, refined estimate {fine}")]
    QuadratureNonConvergence { coarse: Complex64, fine: Complex64 },

    #[error("matrix has zero Frobenius norm")]
    ZeroMatrix,

    #[error("{0} is not a power of two (the FFT mesh count needs N = 2^k)")]
    NotPowerOfTwo(usize),

    #[error("all mask amplitudes are zero, max-normalisation is undefined")]
    DegenerateMask,

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("tape already consumed by a backward pass; run a new forward first")]
    TapeConsumed,

    #[error("node {0} is not a scalar loss")]
    NotScalar(usize),

    #[error("{path}: bad IDX magic 0x{found:08x}, expected 0x{expected:08x}")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("{path}: truncated IDX file, need {expected} bytes, found {actual}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: dimension mismatch: {detail}")]
    DimensionMismatch { path: PathBuf, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid layer stack: {0}")]
    InvalidStack(String),

    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },

    #[error("SVD failed: {0}")]
    Svd(String),

    #[error("noise spec targets nothing")]
    EmptyNoiseTargets,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
