use serde::{Deserialize, Serialize};

use crate::autograd::{BiasSource, NodeId, ParamId, PhaseMode, Tape};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    /// `ReLU(|z| + b) e^{i arg z}`.
    ModreluKeepPhase,
    /// `|z|`, modReLU with zero bias and zero phase.
    Abs,
    /// Identity, modReLU with zero bias and the phase kept.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasKind {
    PerElement,
    SharedScalar,
    Fixed(f64),
    Zero,
}

/// A pointwise activation. Only the combinations listed by
/// [`ActivationSpec::validate`] are accepted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub bias: BiasKind,
}

impl ActivationSpec {
    pub const ABS: Self = Self {
        kind: ActivationKind::Abs,
        bias: BiasKind::Zero,
    };
    pub const LINEAR: Self = Self {
        kind: ActivationKind::Linear,
        bias: BiasKind::Zero,
    };

    pub fn modrelu(bias: BiasKind) -> Self {
        Self {
            kind: ActivationKind::ModreluKeepPhase,
            bias,
        }
    }

    /// Accepted: modReLU with per-element, shared or fixed bias; abs and
    /// linear with zero bias.
    pub fn validate(&self) -> Result<()> {
        let ok = match (self.kind, self.bias) {
            (ActivationKind::ModreluKeepPhase, BiasKind::Zero) => false,
            (ActivationKind::ModreluKeepPhase, BiasKind::Fixed(b)) => b.is_finite(),
            (ActivationKind::ModreluKeepPhase, _) => true,
            (_, BiasKind::Zero) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidStack(format!(
                "unsupported activation {:?} with bias {:?}",
                self.kind, self.bias
            )))
        }
    }

    /// Length of the trainable bias parameter this activation needs for a
    /// layer of `width` outputs.
    pub fn bias_len(&self, width: usize) -> Option<usize> {
        match self.bias {
            BiasKind::PerElement => Some(width),
            BiasKind::SharedScalar => Some(1),
            _ => None,
        }
    }

    /// True when `G(c z) = c G(z)` for `c > 0`.
    pub fn is_multiplicative(&self) -> bool {
        matches!(self.bias, BiasKind::Zero)
    }

    /// Records the activation on `tape`. `bias` must be present exactly when
    /// [`Self::bias_len`] is.
    pub fn apply(&self, tape: &mut Tape<'_>, input: NodeId, bias: Option<ParamId>) -> Result<NodeId> {
        let source = match (self.bias, bias) {
            (BiasKind::PerElement, Some(p)) => BiasSource::PerElement(p),
            (BiasKind::SharedScalar, Some(p)) => BiasSource::Shared(p),
            (BiasKind::Fixed(b), None) => BiasSource::Fixed(b),
            (BiasKind::Zero, None) => BiasSource::None,
            _ => {
                return Err(Error::InvalidStack(format!(
                    "activation bias {:?} does not match the layer's bias parameter",
                    self.bias
                )))
            }
        };
        match self.kind {
            ActivationKind::Linear => Ok(input),
            ActivationKind::Abs => tape.modrelu(input, source, PhaseMode::Zero),
            ActivationKind::ModreluKeepPhase => tape.modrelu(input, source, PhaseMode::Keep),
        }
    }
}
