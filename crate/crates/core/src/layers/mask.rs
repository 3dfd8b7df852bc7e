use std::sync::Arc;

use num_complex::Complex64;

use crate::autograd::{MaskMode, MaskParams, ParamId, ParameterStore};
use crate::error::{Error, Result};

/// Trainable diagonal filter `A = diag(a_m e^{iφ_m})` applied in the Fourier
/// domain.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterMask {
    pub mode: MaskMode,
    pub len: usize,
    pub amplitude: Option<ParamId>,
    pub phase: Option<ParamId>,
    /// Fixed multiplicative factors from noise injection.
    pub perturbation: Option<Arc<Vec<Complex64>>>,
}

impl FilterMask {
    pub fn new(mode: MaskMode, len: usize, amplitude: Option<ParamId>, phase: Option<ParamId>) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidSize("mask length must be >= 1".into()));
        }
        if mode.has_amplitude() != amplitude.is_some() || mode.has_phase() != phase.is_some() {
            return Err(Error::InvalidStack(format!(
                "mask mode {mode:?} does not match the supplied parameters"
            )));
        }
        Ok(Self {
            mode,
            len,
            amplitude,
            phase,
            perturbation: None,
        })
    }

    pub fn params(&self) -> MaskParams {
        MaskParams {
            mode: self.mode,
            amplitude: self.amplitude,
            phase: self.phase,
            perturbation: self.perturbation.clone(),
        }
    }

    /// Trainable parameters owned by the mask.
    pub fn param_ids(&self) -> impl Iterator<Item = ParamId> {
        self.amplitude.into_iter().chain(self.phase)
    }

    /// The realised diagonal, including any perturbation.
    pub fn diagonal(&self, store: &ParameterStore) -> Result<Vec<Complex64>> {
        crate::autograd::realise_mask(store, &self.params(), self.len)
    }
}
