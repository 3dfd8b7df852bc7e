use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

/// Design, train and stress-test photonic convolutional networks built from
/// star-coupler Fourier transforms.
#[derive(Debug, Clone, Parser)]
#[command(name = "photoconv", version)]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for initialisation, shuffling and noise.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory; must be absent or empty.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// 10 000 / 2 000 sample subsets and 10 epochs.
    #[arg(long, global = true)]
    pub desk_scale: bool,

    /// Architecture preset, e.g. pcnn-112-16, pcnn-784-phase, mlp-784, d2nn-16.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Noise width for `noise` and `retrain`.
    #[arg(long, global = true, value_name = "F64")]
    pub sigma: Option<f64>,

    /// Retraining scope.
    #[arg(long, global = true, value_enum)]
    pub scope: Option<ScopeArg>,

    /// Directory with the MNIST-format IDX files. Falls back to `[data] dir`,
    /// then `PHOTOCONV_DATA_DIR`, then `./data/mnist`.
    #[arg(long, global = true, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Final,
    Full,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Compute a star-coupler coupling matrix and its fidelity/transmission.
    Design {
        /// Sweep the edge angle instead and write the trade-off table.
        #[arg(long)]
        sweep: bool,
    },
    /// Train a network and write its report and checkpoint.
    Train,
    /// Evaluate a checkpoint on the test set.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
    },
    /// Accuracy under injected fabrication noise.
    Noise {
        /// Trained parameters; trains from scratch when omitted.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
    /// Inject noise, then retrain with the chosen scope.
    Retrain {
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
    /// Compare MZI-mesh and star-coupler DFT footprints.
    Footprint {
        /// Port count (power of two).
        #[arg(long)]
        ports: Option<usize>,
    },
    /// Compare tape gradients with central differences on one sample.
    Gradcheck,
    /// Train with physical couplers at several edge angles.
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Design { .. } => "design",
            Command::Train => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Noise { .. } => "noise",
            Command::Retrain { .. } => "retrain",
            Command::Footprint { .. } => "footprint",
            Command::Gradcheck => "gradcheck",
            Command::Sweep => "sweep",
        }
    }
}
