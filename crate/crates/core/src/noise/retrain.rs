use serde::{Deserialize, Serialize};

use crate::autograd::ParamRole;
use crate::error::{Error, Result};
use crate::layers::Network;
use crate::trainer::{train, Dataset, TrainReport, TrainSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrainScope {
    /// Only the output fully-connected layer.
    FinalLayerOnly,
    /// Every mask, weight and bias. Star-coupler matrices are never trained.
    Full,
}

impl RetrainScope {
    pub fn as_str(self) -> &'static str {
        match self {
            RetrainScope::FinalLayerOnly => "final",
            RetrainScope::Full => "full",
        }
    }
}

impl std::str::FromStr for RetrainScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "final" | "final_layer_only" => Ok(RetrainScope::FinalLayerOnly),
            "full" => Ok(RetrainScope::Full),
            other => Err(Error::InvalidConfig(format!("unknown retrain scope `{other}` (final|full)"))),
        }
    }
}

/// Retraining defaults: batch 8, 10 epochs, no output-gain recalibration.
pub fn retrain_spec() -> TrainSpec {
    TrainSpec {
        epochs: 10,
        calibrate_output_scale: false,
        ..TrainSpec::default()
    }
}

/// Marks the parameters in `scope` trainable and freezes the rest, including
/// the output gain.
pub fn set_scope(network: &mut Network, scope: RetrainScope) -> Result<()> {
    network.params.set_all_trainable(false);
    match scope {
        RetrainScope::FinalLayerOnly => {
            let ids = network.final_layer_params();
            if ids.is_empty() {
                return Err(Error::InvalidStack("network has no fully-connected output layer".into()));
            }
            for id in ids {
                network.params.get_mut(id).trainable = true;
            }
        }
        RetrainScope::Full => {
            for (_, p) in network.params.iter_mut() {
                p.trainable = p.role != ParamRole::OutputScale;
            }
        }
    }
    Ok(())
}

/// Retrains a (noisy) network in place with the given scope. The noisy
/// transfer matrices and mask perturbations are fixed data and stay as they
/// are.
pub fn retrain(
    network: &mut Network,
    scope: RetrainScope,
    train_data: &Dataset,
    test_data: &Dataset,
    spec: &TrainSpec,
) -> Result<TrainReport> {
    set_scope(network, scope)?;
    let result = train(network, train_data, test_data, spec);
    network.params.set_all_trainable(true);
    result
}
