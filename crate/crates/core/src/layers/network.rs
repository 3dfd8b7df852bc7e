use num_complex::Complex64;

use crate::autograd::{predict, Gradients, NodeId, ParamId, ParameterStore, Tape};
use crate::error::{Error, Result};

use super::layer::Layer;

/// A feed-forward stack of layers with its parameters and the trainable
/// output gain `β` applied to output powers.
#[derive(Clone, Debug)]
pub struct Network {
    pub name: String,
    pub layers: Vec<Layer>,
    pub params: ParameterStore,
    pub output_scale: ParamId,
}

/// Loss, prediction and parameter gradients for one labelled sample.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub loss: f64,
    pub prediction: usize,
    pub gradients: Gradients,
}

impl Network {
    /// Checks that consecutive layer sizes chain and that `β` is a scalar.
    pub fn new(name: impl Into<String>, layers: Vec<Layer>, params: ParameterStore, output_scale: ParamId) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidStack("network has no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::InvalidStack(format!(
                    "{} produces {} values but {} expects {}",
                    pair[0].short_name(),
                    pair[0].outputs(),
                    pair[1].short_name(),
                    pair[1].inputs()
                )));
            }
        }
        if params.values(output_scale).len() != 1 {
            return Err(Error::InvalidStack("output scale must be a scalar".into()));
        }
        Ok(Self {
            name: name.into(),
            layers,
            params,
            output_scale,
        })
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn classes(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// Trainable-parameter count of the optical/electronic network, excluding
    /// the output gain.
    pub fn parameter_count(&self) -> usize {
        self.params.network_parameter_count()
    }

    pub fn output_gain(&self) -> f64 {
        self.params.values(self.output_scale)[0]
    }

    pub fn set_output_gain(&mut self, beta: f64) {
        self.params.get_mut(self.output_scale).values[0] = beta;
    }

    /// Amplitude encoding of real input values.
    pub fn encode(input: &[f64]) -> Vec<Complex64> {
        input.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    /// Records every layer on `tape`, returning the output field node.
    pub fn forward(&self, tape: &mut Tape<'_>, input: NodeId) -> Result<NodeId> {
        let mut x = input;
        for layer in &self.layers {
            x = layer.forward(tape, x)?;
        }
        Ok(x)
    }

    /// Output field for a real input vector.
    pub fn output(&self, input: &[f64]) -> Result<Vec<Complex64>> {
        self.check_input(input)?;
        let mut tape = Tape::new(&self.params);
        let x = tape.constant(Self::encode(input));
        let y = self.forward(&mut tape, x)?;
        Ok(tape.value(y).to_vec())
    }

    pub fn predict(&self, input: &[f64]) -> Result<usize> {
        Ok(predict(&self.output(input)?))
    }

    /// Loss and prediction without gradients.
    pub fn evaluate_sample(&self, input: &[f64], label: usize) -> Result<(f64, usize)> {
        self.check_input(input)?;
        let mut tape = Tape::new(&self.params);
        let x = tape.constant(Self::encode(input));
        let y = self.forward(&mut tape, x)?;
        let prediction = predict(tape.value(y));
        let loss = tape.power_softmax_xent(y, self.output_scale, label)?;
        Ok((tape.scalar(loss)?, prediction))
    }

    pub fn loss_and_gradients(&self, input: &[f64], label: usize) -> Result<SampleOutcome> {
        self.check_input(input)?;
        let mut tape = Tape::new(&self.params);
        let x = tape.constant(Self::encode(input));
        let y = self.forward(&mut tape, x)?;
        let prediction = predict(tape.value(y));
        let loss_node = tape.power_softmax_xent(y, self.output_scale, label)?;
        let loss = tape.scalar(loss_node)?;
        let back = tape.backward(loss_node)?;
        Ok(SampleOutcome {
            loss,
            prediction,
            gradients: back.grads,
        })
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.inputs() {
            return Err(Error::shape(format!("input of length {}", self.inputs()), input.len()));
        }
        Ok(())
    }

    /// Parameters of the last fully-connected layer.
    pub fn final_layer_params(&self) -> Vec<ParamId> {
        self.layers
            .iter()
            .rev()
            .find(|l| matches!(l, Layer::FullyConnected(_)))
            .map(|l| l.param_ids())
            .unwrap_or_default()
    }

    /// Human-readable stack, e.g. `C784->112 -> C112->56 -> W16 -> W10`.
    pub fn describe(&self) -> String {
        self.layers.iter().map(Layer::short_name).collect::<Vec<_>>().join(" -> ")
    }
}
