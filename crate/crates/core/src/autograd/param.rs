use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// What a parameter does in the network; drives retraining scopes, noise
/// targets and the reported parameter count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRole {
    MaskAmplitude,
    MaskPhase,
    Weight,
    Bias,
    /// Global optical gain β on the output powers. Not counted as a network
    /// parameter.
    OutputScale,
}

impl ParamRole {
    pub(crate) fn tag(self) -> u8 {
        match self {
            ParamRole::MaskAmplitude => 0,
            ParamRole::MaskPhase => 1,
            ParamRole::Weight => 2,
            ParamRole::Bias => 3,
            ParamRole::OutputScale => 4,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => ParamRole::MaskAmplitude,
            1 => ParamRole::MaskPhase,
            2 => ParamRole::Weight,
            3 => ParamRole::Bias,
            4 => ParamRole::OutputScale,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub grad: Vec<f64>,
    pub trainable: bool,
    pub role: ParamRole,
}

impl Parameter {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// All real-valued parameters of a model, addressed by [`ParamId`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParameterStore {
    params: Vec<Parameter>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>, role: ParamRole) -> Result<ParamId> {
        let name = name.into();
        let expected: usize = shape.iter().product();
        if expected != values.len() {
            return Err(Error::shape(format!("{expected} values for shape {shape:?}"), values.len()));
        }
        if self.find(&name).is_some() {
            return Err(Error::InvalidStack(format!("duplicate parameter name `{name}`")));
        }
        let grad = vec![0.0; values.len()];
        self.params.push(Parameter {
            name,
            shape,
            values,
            grad,
            trainable: true,
            role,
        });
        Ok(ParamId(self.params.len() - 1))
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn values(&self, id: ParamId) -> &[f64] {
        &self.params[id.0].values
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Parameter)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (ParamId, &mut Parameter)> {
        self.params.iter_mut().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    /// Number of scalar network parameters: everything except the output
    /// gain.
    pub fn network_parameter_count(&self) -> usize {
        self.params
            .iter()
            .filter(|p| p.role != ParamRole::OutputScale)
            .map(Parameter::len)
            .sum()
    }

    pub fn trainable_count(&self) -> usize {
        self.params.iter().filter(|p| p.trainable).map(Parameter::len).sum()
    }

    pub fn set_all_trainable(&mut self, trainable: bool) {
        self.params.iter_mut().for_each(|p| p.trainable = trainable);
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(|p| p.grad.iter_mut().for_each(|g| *g = 0.0));
    }

    /// Adds a gradient buffer into the stored gradients.
    pub fn accumulate(&mut self, grads: &Gradients) {
        for (p, g) in self.params.iter_mut().zip(&grads.buffers) {
            for (dst, src) in p.grad.iter_mut().zip(g) {
                *dst += src;
            }
        }
    }

    pub fn gradients_zeroed(&self) -> Gradients {
        Gradients {
            buffers: self.params.iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    /// Copies every parameter's values, used to snapshot/restore.
    pub fn snapshot(&self) -> Vec<Vec<f64>> {
        self.params.iter().map(|p| p.values.clone()).collect()
    }

    pub fn restore(&mut self, snapshot: &[Vec<f64>]) {
        for (p, v) in self.params.iter_mut().zip(snapshot) {
            p.values.copy_from_slice(v);
        }
    }
}

/// Per-parameter gradient buffers aligned with a [`ParameterStore`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub(crate) buffers: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, id: ParamId) -> &[f64] {
        &self.buffers[id.0]
    }

    pub(crate) fn get_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.buffers[id.0]
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.buffers.iter_mut().zip(&other.buffers) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.buffers.iter_mut().flatten().for_each(|x| *x *= factor);
    }

    pub fn all_finite(&self) -> bool {
        self.buffers.iter().flatten().all(|x| x.is_finite())
    }
}
