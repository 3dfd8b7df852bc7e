//! Architecture presets and construction of freshly initialised networks.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autograd::{MaskMode, ParamId, ParamRole, ParameterStore};
use crate::error::{Error, Result};
use crate::layers::{
    ActivationSpec, BiasKind, ConvolutionLayer, DiffractiveLayer, FilterMask, FullyConnectedLayer, Layer, Network,
};
use crate::optics::{
    coupling_matrix, ideal_dft, ideal_truncated_dft, ParaxialPolicy, QuadratureSpec, SlabOptics, StarCouplerGeometry,
    TransferMatrix,
};

/// One layer of an explicit stack. Input sizes follow from the previous
/// layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSpec {
    /// Convolution keeping `outputs` centered frequencies.
    Conv {
        outputs: usize,
        mask: MaskMode,
        activation: ActivationSpec,
    },
    /// Star coupler, mask, activation (same width in and out).
    Diffractive {
        mask: MaskMode,
        activation: ActivationSpec,
    },
    /// Bare star coupler; `outputs` below the input width gives pooling.
    Transform { outputs: Option<usize> },
    Fc {
        outputs: usize,
        activation: ActivationSpec,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `C784 -> C392 -> C196 -> W56 -> W10`.
    Pcnn784 { mask: MaskMode, linear: bool },
    /// `C^x -> C^{x/2} -> W^y -> W10`, phase-only, linear conv activations.
    PcnnXY { x: usize, y: usize },
    /// `W16 -> W10`.
    Mlp784,
    /// `[F -> phase mask -> abs] x depth -> F`.
    D2nn { depth: usize },
}

impl Preset {
    pub const NAMES: &'static [&'static str] = &[
        "pcnn-784-amp-phase",
        "pcnn-784-amp",
        "pcnn-784-phase",
        "pcnn-784-phase-linear",
        "pcnn-<x>-<y> (e.g. pcnn-112-16, pcnn-256-32)",
        "mlp-784",
        "d2nn-16",
    ];

    pub fn layers(&self) -> Vec<LayerSpec> {
        let fc = |outputs| LayerSpec::Fc {
            outputs,
            activation: ActivationSpec::ABS,
        };
        match *self {
            Preset::Pcnn784 { mask, linear } => {
                let activation = if linear { ActivationSpec::LINEAR } else { ActivationSpec::ABS };
                let mut v: Vec<LayerSpec> = [784, 392, 196]
                    .into_iter()
                    .map(|outputs| LayerSpec::Conv {
                        outputs,
                        mask,
                        activation,
                    })
                    .collect();
                v.extend([fc(56), fc(10)]);
                v
            }
            Preset::PcnnXY { x, y } => {
                let mut v: Vec<LayerSpec> = [x, x / 2]
                    .into_iter()
                    .map(|outputs| LayerSpec::Conv {
                        outputs,
                        mask: MaskMode::PhaseOnly,
                        activation: ActivationSpec::LINEAR,
                    })
                    .collect();
                v.extend([fc(y), fc(10)]);
                v
            }
            Preset::Mlp784 => vec![fc(16), fc(10)],
            Preset::D2nn { depth } => {
                let mut v = vec![
                    LayerSpec::Diffractive {
                        mask: MaskMode::PhaseOnly,
                        activation: ActivationSpec::ABS,
                    };
                    depth
                ];
                v.push(LayerSpec::Transform { outputs: Some(10) });
                v
            }
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let unknown = || Error::UnknownPreset(s.to_string());
        let pcnn784 = |mask, linear| Ok(Preset::Pcnn784 { mask, linear });
        match lower.as_str() {
            "pcnn-784-amp-phase" => return pcnn784(MaskMode::AmpPhase, false),
            "pcnn-784-amp" => return pcnn784(MaskMode::AmpOnly, false),
            "pcnn-784-phase" => return pcnn784(MaskMode::PhaseOnly, false),
            "pcnn-784-phase-linear" => return pcnn784(MaskMode::PhaseOnly, true),
            "mlp-784" => return Ok(Preset::Mlp784),
            _ => {}
        }
        if let Some(depth) = lower.strip_prefix("d2nn-") {
            let depth: usize = depth.parse().map_err(|_| unknown())?;
            return if depth == 0 { Err(unknown()) } else { Ok(Preset::D2nn { depth }) };
        }
        if let Some(rest) = lower.strip_prefix("pcnn-") {
            let (x, y) = rest.split_once('-').ok_or_else(unknown)?;
            let x: usize = x.parse().map_err(|_| unknown())?;
            let y: usize = y.parse().map_err(|_| unknown())?;
            if !(2..=784).contains(&x) || y == 0 {
                return Err(unknown());
            }
            return Ok(Preset::PcnnXY { x, y });
        }
        Err(unknown())
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Pcnn784 { mask, linear } => {
                let m = match mask {
                    MaskMode::AmpPhase => "amp-phase",
                    MaskMode::AmpOnly => "amp",
                    MaskMode::PhaseOnly => "phase",
                };
                write!(f, "pcnn-784-{m}{}", if *linear { "-linear" } else { "" })
            }
            Preset::PcnnXY { x, y } => write!(f, "pcnn-{x}-{y}"),
            Preset::Mlp784 => write!(f, "mlp-784"),
            Preset::D2nn { depth } => write!(f, "d2nn-{depth}"),
        }
    }
}

/// Where the star-coupler matrices come from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpticsMode {
    #[default]
    Ideal,
    /// Coupling matrices of physical couplers whose outermost input port sits
    /// at `theta_n0_deg`.
    Physical {
        theta_n0_deg: f64,
        slab: SlabOptics,
        #[serde(default)]
        quadrature: QuadratureSpec,
        #[serde(default)]
        paraxial: ParaxialPolicy,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseInit {
    /// All mask phases start at 0.
    #[default]
    Zero,
    /// `θ ~ U[0, 1)`.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSpec {
    pub phase: PhaseInit,
    /// Amplitude parameters are drawn from `U[amplitude_low, 1]`.
    pub amplitude_low: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            phase: PhaseInit::Zero,
            amplitude_low: 0.5,
        }
    }
}

/// Everything needed to build a network: a preset or an explicit stack, with
/// optional activation overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub preset: Option<String>,
    pub layers: Vec<LayerSpec>,
    pub inputs: usize,
    /// Replaces the activation of every convolution / diffractive layer.
    pub conv_activation: Option<ActivationSpec>,
    /// Replaces the activation of every fully-connected layer.
    pub fc_activation: Option<ActivationSpec>,
    pub optics: OpticsMode,
    pub init: InitSpec,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            preset: Some("pcnn-112-16".into()),
            layers: Vec::new(),
            inputs: 784,
            conv_activation: None,
            fc_activation: None,
            optics: OpticsMode::Ideal,
            init: InitSpec::default(),
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.into()),
            ..Self::default()
        }
    }

    /// The resolved layer stack, activation overrides applied.
    pub fn stack(&self) -> Result<Vec<LayerSpec>> {
        let mut stack = match (&self.preset, self.layers.is_empty()) {
            (Some(_), false) => {
                return Err(Error::InvalidStack(
                    "give either a preset or an explicit layer list, not both".into(),
                ))
            }
            (Some(name), true) => name.parse::<Preset>()?.layers(),
            (None, false) => self.layers.clone(),
            (None, true) => return Err(Error::InvalidStack("no preset and no layers".into())),
        };
        for layer in &mut stack {
            match layer {
                LayerSpec::Conv { activation, .. } | LayerSpec::Diffractive { activation, .. } => {
                    if let Some(a) = self.conv_activation {
                        *activation = a;
                    }
                }
                LayerSpec::Fc { activation, .. } => {
                    if let Some(a) = self.fc_activation {
                        *activation = a;
                    }
                }
                LayerSpec::Transform { .. } => {}
            }
        }
        Ok(stack)
    }

    pub fn name(&self) -> String {
        self.preset.clone().unwrap_or_else(|| "custom".into())
    }
}

/// Trainable parameters of a stack (masks, weights, biases; the output gain
/// is not counted).
pub fn analytic_parameter_count(inputs: usize, stack: &[LayerSpec]) -> Result<usize> {
    let mut width = inputs;
    let mut total = 0;
    for layer in stack {
        let (outputs, count) = match layer {
            LayerSpec::Conv {
                outputs,
                mask,
                activation,
            } => (*outputs, mask_count(*mask, *outputs) + activation.bias_len(*outputs).unwrap_or(0)),
            LayerSpec::Diffractive { mask, activation } => {
                (width, mask_count(*mask, width) + activation.bias_len(width).unwrap_or(0))
            }
            LayerSpec::Transform { outputs } => (outputs.unwrap_or(width), 0),
            LayerSpec::Fc { outputs, activation } => {
                (*outputs, outputs * width + activation.bias_len(*outputs).unwrap_or(0))
            }
        };
        if outputs == 0 || outputs > width && !matches!(layer, LayerSpec::Fc { .. }) {
            return Err(Error::InvalidStack(format!(
                "layer {layer:?} cannot map {width} inputs to {outputs} outputs"
            )));
        }
        total += count;
        width = outputs;
    }
    Ok(total)
}

fn mask_count(mode: MaskMode, len: usize) -> usize {
    len * (usize::from(mode.has_amplitude()) + usize::from(mode.has_phase()))
}

/// Builds star-coupler matrices, sharing one per `(inputs, outputs)` shape.
struct MatrixSource<'a> {
    mode: &'a OpticsMode,
    cache: HashMap<(usize, usize), TransferMatrix>,
}

impl MatrixSource<'_> {
    fn get(&mut self, inputs: usize, outputs: usize) -> Result<TransferMatrix> {
        if let Some(m) = self.cache.get(&(inputs, outputs)) {
            return Ok(m.clone());
        }
        let m = match self.mode {
            OpticsMode::Ideal if inputs == outputs => ideal_dft(inputs, false)?,
            OpticsMode::Ideal => ideal_truncated_dft(outputs, inputs)?,
            OpticsMode::Physical {
                theta_n0_deg,
                slab,
                quadrature,
                paraxial,
            } => {
                let g = StarCouplerGeometry::from_edge_angle(
                    *slab,
                    theta_n0_deg.to_radians(),
                    inputs,
                    outputs,
                    paraxial,
                )?;
                coupling_matrix(&g, quadrature)?
            }
        };
        self.cache.insert((inputs, outputs), m.clone());
        Ok(m)
    }
}

/// Builds a network with freshly initialised parameters drawn from
/// `config.seed`: phases per [`InitSpec`], amplitudes `U[low, 1]`, weights
/// `U(±sqrt(6 / (N + M)))`, biases 0 and output gain 1.
pub fn build_network(config: &NetworkConfig) -> Result<Network> {
    let stack = config.stack()?;
    let expected = analytic_parameter_count(config.inputs, &stack)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut store = ParameterStore::new();
    let mut source = MatrixSource {
        mode: &config.optics,
        cache: HashMap::new(),
    };
    let mut layers = Vec::with_capacity(stack.len());
    let mut width = config.inputs;
    for (i, spec) in stack.iter().enumerate() {
        let layer = match spec {
            LayerSpec::Conv {
                outputs,
                mask,
                activation,
            } => {
                let f_in = source.get(width, *outputs)?;
                let f_out = source.get(*outputs, *outputs)?;
                let mask = new_mask(&mut store, &mut rng, &config.init, i, *mask, *outputs)?;
                let bias = new_bias(&mut store, i, activation, *outputs)?;
                Layer::Convolution(ConvolutionLayer::new(f_in, mask, f_out, *activation, bias)?)
            }
            LayerSpec::Diffractive { mask, activation } => {
                let transform = source.get(width, width)?;
                let mask = new_mask(&mut store, &mut rng, &config.init, i, *mask, width)?;
                let bias = new_bias(&mut store, i, activation, width)?;
                Layer::Diffractive(DiffractiveLayer::new(transform, mask, *activation, bias)?)
            }
            LayerSpec::Transform { outputs } => Layer::Transform(source.get(width, outputs.unwrap_or(width))?),
            LayerSpec::Fc { outputs, activation } => {
                let limit = (6.0 / (width + outputs) as f64).sqrt();
                let values = (0..outputs * width).map(|_| rng.random_range(-limit..limit)).collect();
                let weight = store.add(format!("layer{i}.weight"), vec![*outputs, width], values, ParamRole::Weight)?;
                let bias = new_bias(&mut store, i, activation, *outputs)?;
                Layer::FullyConnected(FullyConnectedLayer::new(weight, *outputs, width, *activation, bias)?)
            }
        };
        width = layer.outputs();
        layers.push(layer);
    }
    let beta = store.add("output_scale", vec![1], vec![1.0], ParamRole::OutputScale)?;
    let network = Network::new(config.name(), layers, store, beta)?;
    debug_assert_eq!(network.parameter_count(), expected);
    Ok(network)
}

fn new_mask(
    store: &mut ParameterStore,
    rng: &mut ChaCha8Rng,
    init: &InitSpec,
    layer: usize,
    mode: MaskMode,
    len: usize,
) -> Result<FilterMask> {
    let amplitude = if mode.has_amplitude() {
        let low = init.amplitude_low;
        if !(low > 0.0 && low <= 1.0) {
            return Err(Error::InvalidConfig(format!("amplitude_low = {low} must lie in (0, 1]")));
        }
        let values = (0..len).map(|_| rng.random_range(low..=1.0)).collect();
        Some(store.add(format!("layer{layer}.amplitude"), vec![len], values, ParamRole::MaskAmplitude)?)
    } else {
        None
    };
    let phase = if mode.has_phase() {
        let values = match init.phase {
            PhaseInit::Zero => vec![0.0; len],
            PhaseInit::Uniform => (0..len).map(|_| rng.random::<f64>()).collect(),
        };
        Some(store.add(format!("layer{layer}.phase"), vec![len], values, ParamRole::MaskPhase)?)
    } else {
        None
    };
    FilterMask::new(mode, len, amplitude, phase)
}

fn new_bias(store: &mut ParameterStore, layer: usize, activation: &ActivationSpec, width: usize) -> Result<Option<ParamId>> {
    activation.validate()?;
    match activation.bias_len(width) {
        Some(n) => Ok(Some(store.add(format!("layer{layer}.bias"), vec![n], vec![0.0; n], ParamRole::Bias)?)),
        None => Ok(None),
    }
}

/// True when every activation in the stack is homogeneous of degree one, so
/// predictions do not depend on the input scale.
pub fn is_scale_invariant(stack: &[LayerSpec]) -> bool {
    stack.iter().all(|l| match l {
        LayerSpec::Conv { activation, .. }
        | LayerSpec::Diffractive { activation, .. }
        | LayerSpec::Fc { activation, .. } => matches!(activation.bias, BiasKind::Zero),
        LayerSpec::Transform { .. } => true,
    })
}
