use crate::autograd::{NodeId, ParamId, Tape};
use crate::error::{Error, Result};
use crate::optics::TransferMatrix;

use super::activation::ActivationSpec;
use super::mask::FilterMask;

/// Fourier-domain convolution with optional spectral pooling:
/// `G(F_out · A · F_in · u)` with `F_in` of shape `M x N` and `F_out` `M x M`.
#[derive(Clone, Debug)]
pub struct ConvolutionLayer {
    pub f_in: TransferMatrix,
    pub mask: FilterMask,
    pub f_out: TransferMatrix,
    pub activation: ActivationSpec,
    pub bias: Option<ParamId>,
}

impl ConvolutionLayer {
    pub fn new(
        f_in: TransferMatrix,
        mask: FilterMask,
        f_out: TransferMatrix,
        activation: ActivationSpec,
        bias: Option<ParamId>,
    ) -> Result<Self> {
        let m = f_in.outputs();
        if mask.len != m {
            return Err(Error::shape(format!("mask of length {m}"), mask.len));
        }
        if f_out.outputs() != m || f_out.inputs() != m {
            return Err(Error::shape(
                format!("{m}x{m} output transform"),
                format!("{}x{}", f_out.outputs(), f_out.inputs()),
            ));
        }
        check_activation(&activation, bias.is_some(), m)?;
        Ok(Self {
            f_in,
            mask,
            f_out,
            activation,
            bias,
        })
    }

    pub fn inputs(&self) -> usize {
        self.f_in.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.f_out.outputs()
    }
}

/// A single star coupler followed by a diffractive phase/amplitude mask and
/// an activation.
#[derive(Clone, Debug)]
pub struct DiffractiveLayer {
    pub transform: TransferMatrix,
    pub mask: FilterMask,
    pub activation: ActivationSpec,
    pub bias: Option<ParamId>,
}

impl DiffractiveLayer {
    pub fn new(transform: TransferMatrix, mask: FilterMask, activation: ActivationSpec, bias: Option<ParamId>) -> Result<Self> {
        if mask.len != transform.outputs() {
            return Err(Error::shape(format!("mask of length {}", transform.outputs()), mask.len));
        }
        check_activation(&activation, bias.is_some(), mask.len)?;
        Ok(Self {
            transform,
            mask,
            activation,
            bias,
        })
    }
}

/// Real-valued weights `W` (row-major `rows x cols`) followed by an
/// activation.
#[derive(Clone, Debug)]
pub struct FullyConnectedLayer {
    pub weight: ParamId,
    pub rows: usize,
    pub cols: usize,
    pub activation: ActivationSpec,
    pub bias: Option<ParamId>,
}

impl FullyConnectedLayer {
    pub fn new(weight: ParamId, rows: usize, cols: usize, activation: ActivationSpec, bias: Option<ParamId>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidSize("fully-connected layer needs rows, cols >= 1".into()));
        }
        check_activation(&activation, bias.is_some(), rows)?;
        Ok(Self {
            weight,
            rows,
            cols,
            activation,
            bias,
        })
    }
}

fn check_activation(spec: &ActivationSpec, has_bias: bool, width: usize) -> Result<()> {
    spec.validate()?;
    if spec.bias_len(width).is_some() != has_bias {
        return Err(Error::InvalidStack(format!(
            "activation bias {:?} needs {} bias parameter",
            spec.bias,
            if has_bias { "no" } else { "a" }
        )));
    }
    Ok(())
}

/// One stage of a network.
#[derive(Clone, Debug)]
pub enum Layer {
    Convolution(ConvolutionLayer),
    Diffractive(DiffractiveLayer),
    /// A fixed linear transform: spectral pooling or a bare star coupler.
    Transform(TransferMatrix),
    FullyConnected(FullyConnectedLayer),
}

impl Layer {
    pub fn inputs(&self) -> usize {
        match self {
            Layer::Convolution(c) => c.inputs(),
            Layer::Diffractive(d) => d.transform.inputs(),
            Layer::Transform(t) => t.inputs(),
            Layer::FullyConnected(f) => f.cols,
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            Layer::Convolution(c) => c.outputs(),
            Layer::Diffractive(d) => d.transform.outputs(),
            Layer::Transform(t) => t.outputs(),
            Layer::FullyConnected(f) => f.rows,
        }
    }

    pub fn forward(&self, tape: &mut Tape<'_>, input: NodeId) -> Result<NodeId> {
        match self {
            Layer::Convolution(c) => conv_forward(c, tape, input),
            Layer::Diffractive(d) => {
                let x = tape.matvec(&d.transform.entries, input)?;
                let x = tape.diagonal_mask(&d.mask.params(), x)?;
                d.activation.apply(tape, x, d.bias)
            }
            Layer::Transform(t) => tape.matvec(&t.entries, input),
            Layer::FullyConnected(f) => fc_forward(f, tape, input),
        }
    }

    /// Parameters owned by this layer, in a fixed order.
    pub fn param_ids(&self) -> Vec<ParamId> {
        match self {
            Layer::Convolution(c) => c.mask.param_ids().chain(c.bias).collect(),
            Layer::Diffractive(d) => d.mask.param_ids().chain(d.bias).collect(),
            Layer::Transform(_) => Vec::new(),
            Layer::FullyConnected(f) => std::iter::once(f.weight).chain(f.bias).collect(),
        }
    }

    pub fn short_name(&self) -> String {
        match self {
            Layer::Convolution(c) if c.inputs() == c.outputs() => format!("C{}", c.outputs()),
            Layer::Convolution(c) => format!("C{}->{}", c.inputs(), c.outputs()),
            Layer::Diffractive(d) => format!("D{}", d.transform.outputs()),
            Layer::Transform(t) => format!("F{}x{}", t.outputs(), t.inputs()),
            Layer::FullyConnected(f) => format!("W{}", f.rows),
        }
    }
}

/// `G(F_out · A · F_in · u)`.
pub fn conv_forward(layer: &ConvolutionLayer, tape: &mut Tape<'_>, u: NodeId) -> Result<NodeId> {
    let x = tape.matvec(&layer.f_in.entries, u)?;
    let x = tape.diagonal_mask(&layer.mask.params(), x)?;
    let x = tape.matvec(&layer.f_out.entries, x)?;
    layer.activation.apply(tape, x, layer.bias)
}

/// Spectral pooling by an `M x N` transform with `M < N`.
pub fn pool(tape: &mut Tape<'_>, u: NodeId, f_pool: &TransferMatrix) -> Result<NodeId> {
    if f_pool.outputs() >= f_pool.inputs() {
        return Err(Error::InvalidSize(format!(
            "pooling needs M < N, got {}x{}",
            f_pool.outputs(),
            f_pool.inputs()
        )));
    }
    tape.matvec(&f_pool.entries, u)
}

/// `G(W · u)` with real `W`.
pub fn fc_forward(layer: &FullyConnectedLayer, tape: &mut Tape<'_>, u: NodeId) -> Result<NodeId> {
    let x = tape.real_matvec(layer.weight, layer.rows, layer.cols, u)?;
    layer.activation.apply(tape, x, layer.bias)
}
