use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::param::{Gradients, ParamId, ParameterStore};
use crate::error::{Error, Result};
use crate::linalg::{adjoint_matvec_into, matvec_into, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    AmpPhase,
    AmpOnly,
    PhaseOnly,
}

impl MaskMode {
    pub fn has_amplitude(self) -> bool {
        matches!(self, MaskMode::AmpPhase | MaskMode::AmpOnly)
    }

    pub fn has_phase(self) -> bool {
        matches!(self, MaskMode::AmpPhase | MaskMode::PhaseOnly)
    }
}

/// Parameters of a diagonal filter `diag(a_m e^{i 2π θ_m})`, with
/// `a_m = |α_m| / max |α|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskParams {
    pub mode: MaskMode,
    pub amplitude: Option<ParamId>,
    pub phase: Option<ParamId>,
    /// Fixed complex factors multiplied into the realised mask (fabrication
    /// noise). Not trainable.
    pub perturbation: Option<Arc<Vec<Complex64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BiasSource {
    None,
    Fixed(f64),
    /// One trainable value shared by every element.
    Shared(ParamId),
    PerElement(ParamId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    Keep,
    Zero,
}

enum Op {
    Leaf,
    MatVec {
        matrix: Arc<ComplexMatrix>,
        input: usize,
    },
    RealMatVec {
        weight: ParamId,
        rows: usize,
        cols: usize,
        input: usize,
    },
    Mask {
        input: usize,
        factors: Vec<Complex64>,
        phasors: Vec<Complex64>,
        winner: usize,
        max_abs: f64,
        mask: MaskParams,
    },
    ModRelu {
        input: usize,
        bias: BiasSource,
        phase: PhaseMode,
    },
    Loss {
        input: usize,
        scale: ParamId,
        label: usize,
        probs: Vec<f64>,
    },
    Power {
        input: usize,
        select: Option<usize>,
    },
}

struct Node {
    value: Vec<Complex64>,
    op: Op,
    requires_grad: bool,
}

/// Record of one forward pass. Nodes are appended in evaluation order, so the
/// backward pass walks them in reverse.
pub struct Tape<'a> {
    params: &'a ParameterStore,
    nodes: Vec<Node>,
    consumed: bool,
}

/// Result of [`Tape::backward`].
#[derive(Clone, Debug)]
pub struct Backward {
    pub grads: Gradients,
    /// Adjoints `∂L/∂Re v + i ∂L/∂Im v` of every [`Tape::variable`] leaf.
    pub inputs: BTreeMap<NodeId, Vec<Complex64>>,
}

impl<'a> Tape<'a> {
    pub fn new(params: &'a ParameterStore) -> Self {
        Self {
            params,
            nodes: Vec::new(),
            consumed: false,
        }
    }

    pub fn params(&self) -> &ParameterStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[Complex64] {
        &self.nodes[id.0].value
    }

    /// Scalar value of a loss node.
    pub fn scalar(&self, id: NodeId) -> Result<f64> {
        match self.nodes[id.0].op {
            Op::Loss { .. } | Op::Power { .. } => Ok(self.nodes[id.0].value[0].re),
            _ => Err(Error::NotScalar(id.0)),
        }
    }

    /// Softmax probabilities stored by a loss node.
    pub fn probabilities(&self, id: NodeId) -> Option<&[f64]> {
        match &self.nodes[id.0].op {
            Op::Loss { probs, .. } => Some(probs),
            _ => None,
        }
    }

    /// Input that does not need a gradient.
    pub fn constant(&mut self, value: Vec<Complex64>) -> NodeId {
        self.push(value, Op::Leaf, false)
    }

    /// Input whose adjoint is reported by the backward pass.
    pub fn variable(&mut self, value: Vec<Complex64>) -> NodeId {
        self.push(value, Op::Leaf, true)
    }

    fn push(&mut self, value: Vec<Complex64>, op: Op, requires_grad: bool) -> NodeId {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    fn trainable(&self, id: Option<ParamId>) -> bool {
        id.is_some_and(|p| self.params.get(p).trainable)
    }

    /// `y = M x` for a constant complex matrix.
    pub fn matvec(&mut self, matrix: &Arc<ComplexMatrix>, input: NodeId) -> Result<NodeId> {
        let x = &self.nodes[input.0].value;
        if matrix.ncols() != x.len() {
            return Err(Error::shape(
                format!("vector of length {}", matrix.ncols()),
                x.len(),
            ));
        }
        let mut y = vec![Complex64::default(); matrix.nrows()];
        matvec_into(matrix, x, &mut y);
        let rg = self.needs(input);
        Ok(self.push(
            y,
            Op::MatVec {
                matrix: Arc::clone(matrix),
                input: input.0,
            },
            rg,
        ))
    }

    /// `y = W x` for a real, row-major `rows x cols` weight parameter.
    pub fn real_matvec(&mut self, weight: ParamId, rows: usize, cols: usize, input: NodeId) -> Result<NodeId> {
        let w = self.params.values(weight);
        if w.len() != rows * cols {
            return Err(Error::shape(format!("{rows}x{cols} weight"), w.len()));
        }
        let x = &self.nodes[input.0].value;
        if x.len() != cols {
            return Err(Error::shape(format!("vector of length {cols}"), x.len()));
        }
        let y: Vec<Complex64> = w
            .chunks_exact(cols)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| b * a).sum())
            .collect();
        let rg = self.needs(input) || self.trainable(Some(weight));
        Ok(self.push(
            y,
            Op::RealMatVec {
                weight,
                rows,
                cols,
                input: input.0,
            },
            rg,
        ))
    }

    /// `y_m = a_m e^{iφ_m} x_m`.
    pub fn diagonal_mask(&mut self, mask: &MaskParams, input: NodeId) -> Result<NodeId> {
        let n = self.nodes[input.0].value.len();
        let realised = realise(self.params, mask, n)?;
        let x = &self.nodes[input.0].value;
        let y = x.iter().zip(&realised.factors).map(|(a, b)| a * b).collect();
        let rg = self.needs(input) || self.trainable(mask.amplitude) || self.trainable(mask.phase);
        Ok(self.push(
            y,
            Op::Mask {
                input: input.0,
                factors: realised.factors,
                phasors: realised.phasors,
                winner: realised.winner,
                max_abs: realised.max_abs,
                mask: mask.clone(),
            },
            rg,
        ))
    }

    /// `y_m = ReLU(|x_m| + b_m) e^{iφ_m}` with `φ_m = arg x_m` or 0.
    pub fn modrelu(&mut self, input: NodeId, bias: BiasSource, phase: PhaseMode) -> Result<NodeId> {
        let n = self.nodes[input.0].value.len();
        let biases = bias_values(self.params, bias, n)?;
        let x = &self.nodes[input.0].value;
        let y = x
            .iter()
            .zip(&biases)
            .map(|(&z, &b)| {
                let r = z.norm();
                let s = r + b;
                if s <= 0.0 {
                    Complex64::default()
                } else {
                    match phase {
                        PhaseMode::Keep if r > 0.0 => z * (s / r),
                        _ => Complex64::new(s, 0.0),
                    }
                }
            })
            .collect();
        let bias_param = match bias {
            BiasSource::Shared(p) | BiasSource::PerElement(p) => Some(p),
            _ => None,
        };
        let rg = self.needs(input) || self.trainable(bias_param);
        Ok(self.push(
            y,
            Op::ModRelu {
                input: input.0,
                bias,
                phase,
            },
            rg,
        ))
    }

    /// Cross-entropy of `softmax(β^2 |v|^2)` against `label`.
    pub fn power_softmax_xent(&mut self, input: NodeId, scale: ParamId, label: usize) -> Result<NodeId> {
        let v = &self.nodes[input.0].value;
        if label >= v.len() {
            return Err(Error::LabelOutOfRange {
                label,
                classes: v.len(),
            });
        }
        let beta = scalar_param(self.params, scale)?;
        let logits: Vec<f64> = v.iter().map(|z| beta * beta * z.norm_sqr()).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let loss = max + total.ln() - logits[label];
        let probs = exps.iter().map(|e| e / total).collect();
        Ok(self.push(
            vec![Complex64::new(loss, 0.0)],
            Op::Loss {
                input: input.0,
                scale,
                label,
                probs,
            },
            true,
        ))
    }

    /// Scalar `sum |v|^2`, or `|v_m|^2` when `select` is `Some(m)`.
    pub fn power_loss(&mut self, input: NodeId, select: Option<usize>) -> Result<NodeId> {
        let v = &self.nodes[input.0].value;
        let total = match select {
            Some(m) if m >= v.len() => {
                return Err(Error::LabelOutOfRange {
                    label: m,
                    classes: v.len(),
                })
            }
            Some(m) => v[m].norm_sqr(),
            None => crate::linalg::power(v),
        };
        Ok(self.push(
            vec![Complex64::new(total, 0.0)],
            Op::Power {
                input: input.0,
                select,
            },
            true,
        ))
    }

    /// Reverse pass from a loss node. A tape can be differentiated once.
    pub fn backward(&mut self, loss: NodeId) -> Result<Backward> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        if !matches!(self.nodes[loss.0].op, Op::Loss { .. } | Op::Power { .. }) {
            return Err(Error::NotScalar(loss.0));
        }
        self.consumed = true;
        let params = self.params;
        let mut grads = params.gradients_zeroed();
        let mut adj: Vec<Option<Vec<Complex64>>> = (0..self.nodes.len()).map(|_| None).collect();
        adj[loss.0] = Some(vec![Complex64::new(1.0, 0.0)]);
        let mut inputs = BTreeMap::new();

        for i in (0..=loss.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {
                    if node.requires_grad {
                        inputs.insert(NodeId(i), g);
                    }
                }
                Op::MatVec { matrix, input } => {
                    if self.nodes[*input].requires_grad {
                        let mut back = vec![Complex64::default(); matrix.ncols()];
                        adjoint_matvec_into(matrix, &g, &mut back);
                        add_adjoint(&mut adj, *input, back);
                    }
                }
                Op::RealMatVec {
                    weight,
                    rows,
                    cols,
                    input,
                } => {
                    let x = &self.nodes[*input].value;
                    if params.get(*weight).trainable {
                        let gw = grads.get_mut(*weight);
                        for r in 0..*rows {
                            let gr = g[r];
                            for c in 0..*cols {
                                // Re(conj(ȳ_r) x_c)
                                gw[r * cols + c] += gr.re * x[c].re + gr.im * x[c].im;
                            }
                        }
                    }
                    if self.nodes[*input].requires_grad {
                        let w = params.values(*weight);
                        let mut back = vec![Complex64::default(); *cols];
                        for (row, gr) in w.chunks_exact(*cols).zip(&g) {
                            for (b, &a) in back.iter_mut().zip(row) {
                                *b += gr * a;
                            }
                        }
                        add_adjoint(&mut adj, *input, back);
                    }
                }
                Op::Mask {
                    input,
                    factors,
                    phasors,
                    winner,
                    max_abs,
                    mask,
                } => {
                    let x = &self.nodes[*input].value;
                    let y = &node.value;
                    if let Some(pid) = mask.phase.filter(|p| params.get(*p).trainable) {
                        let gp = grads.get_mut(pid);
                        for m in 0..y.len() {
                            // ∂y/∂θ = i 2π y
                            let dy = Complex64::new(0.0, 2.0 * PI) * y[m];
                            gp[m] += (g[m].conj() * dy).re;
                        }
                    }
                    if let Some(aid) = mask.amplitude.filter(|p| params.get(*p).trainable) {
                        let alpha = params.values(aid);
                        let mut cross = 0.0;
                        let ga = grads.get_mut(aid);
                        for m in 0..y.len() {
                            if m == *winner {
                                continue;
                            }
                            let g_a = (g[m].conj() * phasors[m] * x[m]).re;
                            ga[m] += g_a * sign(alpha[m]) / max_abs;
                            cross += g_a * alpha[m].abs();
                        }
                        ga[*winner] -= cross * sign(alpha[*winner]) / (max_abs * max_abs);
                    }
                    if self.nodes[*input].requires_grad {
                        let back = g.iter().zip(factors).map(|(gm, f)| f.conj() * gm).collect();
                        add_adjoint(&mut adj, *input, back);
                    }
                }
                Op::ModRelu { input, bias, phase } => {
                    let x = &self.nodes[*input].value;
                    let biases = bias_values(params, *bias, x.len())?;
                    let mut back = vec![Complex64::default(); x.len()];
                    let mut gb = vec![0.0; x.len()];
                    for m in 0..x.len() {
                        let r = x[m].norm();
                        let b = biases[m];
                        if r + b <= 0.0 {
                            continue;
                        }
                        match phase {
                            PhaseMode::Keep if r > 0.0 => {
                                let u = x[m] / r;
                                let proj = (g[m].conj() * x[m]).re;
                                back[m] = g[m] * (1.0 + b / r) - u * (b / (r * r) * proj);
                                gb[m] = (g[m].conj() * u).re;
                            }
                            PhaseMode::Zero if r > 0.0 => {
                                back[m] = x[m] / r * g[m].re;
                                gb[m] = g[m].re;
                            }
                            // |x| = 0: subgradient 0 for x, output is the real bias
                            _ => gb[m] = g[m].re,
                        }
                    }
                    match bias {
                        BiasSource::Shared(p) if params.get(*p).trainable => {
                            grads.get_mut(*p)[0] += gb.iter().sum::<f64>();
                        }
                        BiasSource::PerElement(p) if params.get(*p).trainable => {
                            grads.get_mut(*p).iter_mut().zip(&gb).for_each(|(d, s)| *d += s);
                        }
                        _ => {}
                    }
                    if self.nodes[*input].requires_grad {
                        add_adjoint(&mut adj, *input, back);
                    }
                }
                Op::Loss {
                    input,
                    scale,
                    label,
                    probs,
                } => {
                    let upstream = g[0].re;
                    let v = &self.nodes[*input].value;
                    let beta = params.values(*scale)[0];
                    let mut dbeta = 0.0;
                    let mut back = vec![Complex64::default(); v.len()];
                    for m in 0..v.len() {
                        let dl = (probs[m] - if m == *label { 1.0 } else { 0.0 }) * upstream;
                        dbeta += dl * 2.0 * beta * v[m].norm_sqr();
                        back[m] = v[m] * (2.0 * beta * beta * dl);
                    }
                    if params.get(*scale).trainable {
                        grads.get_mut(*scale)[0] += dbeta;
                    }
                    if self.nodes[*input].requires_grad {
                        add_adjoint(&mut adj, *input, back);
                    }
                }
                Op::Power { input, select } => {
                    if self.nodes[*input].requires_grad {
                        let v = &self.nodes[*input].value;
                        let upstream = g[0].re;
                        let back = v
                            .iter()
                            .enumerate()
                            .map(|(m, z)| match select {
                                Some(s) if *s != m => Complex64::default(),
                                _ => z * (2.0 * upstream),
                            })
                            .collect();
                        add_adjoint(&mut adj, *input, back);
                    }
                }
            }
        }
        Ok(Backward { grads, inputs })
    }
}

/// Index of the largest output power.
pub fn predict(output: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_p = f64::NEG_INFINITY;
    for (i, z) in output.iter().enumerate() {
        let p = z.norm_sqr();
        if p > best_p {
            best = i;
            best_p = p;
        }
    }
    best
}

fn add_adjoint(adj: &mut [Option<Vec<Complex64>>], at: usize, contribution: Vec<Complex64>) {
    match &mut adj[at] {
        Some(existing) => existing.iter_mut().zip(contribution).for_each(|(a, b)| *a += b),
        slot @ None => *slot = Some(contribution),
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn scalar_param(params: &ParameterStore, id: ParamId) -> Result<f64> {
    let v = params.values(id);
    if v.len() != 1 {
        return Err(Error::shape("scalar parameter", v.len()));
    }
    Ok(v[0])
}

fn bias_values(params: &ParameterStore, bias: BiasSource, n: usize) -> Result<Vec<f64>> {
    Ok(match bias {
        BiasSource::None => vec![0.0; n],
        BiasSource::Fixed(b) => vec![b; n],
        BiasSource::Shared(p) => vec![scalar_param(params, p)?; n],
        BiasSource::PerElement(p) => {
            let v = params.values(p);
            if v.len() != n {
                return Err(Error::shape(format!("{n} biases"), v.len()));
            }
            v.to_vec()
        }
    })
}

struct RealisedMask {
    factors: Vec<Complex64>,
    phasors: Vec<Complex64>,
    winner: usize,
    max_abs: f64,
}

/// Realised mask diagonal `a_m e^{iφ_m}` times any perturbation.
pub(crate) fn realise_mask(params: &ParameterStore, mask: &MaskParams, n: usize) -> Result<Vec<Complex64>> {
    Ok(realise(params, mask, n)?.factors)
}

/// Evaluates the diagonal of a mask for vectors of length `n`.
fn realise(params: &ParameterStore, mask: &MaskParams, n: usize) -> Result<RealisedMask> {
    let check = |id: Option<ParamId>, what: &str| -> Result<Option<&[f64]>> {
        match id {
            Some(p) => {
                let v = params.values(p);
                if v.len() != n {
                    return Err(Error::shape(format!("{n} mask {what} values"), v.len()));
                }
                Ok(Some(v))
            }
            None => Err(Error::InvalidStack(format!("mask mode {:?} needs a {what} parameter", mask.mode))),
        }
    };
    let (amps, winner, max_abs) = if mask.mode.has_amplitude() {
        let alpha = check(mask.amplitude, "amplitude")?.expect("checked");
        let mut winner = 0;
        let mut max_abs = 0.0;
        for (i, a) in alpha.iter().enumerate() {
            if a.abs() > max_abs {
                max_abs = a.abs();
                winner = i;
            }
        }
        if max_abs == 0.0 {
            return Err(Error::DegenerateMask);
        }
        (alpha.iter().map(|a| a.abs() / max_abs).collect(), winner, max_abs)
    } else {
        (vec![1.0; n], 0, 1.0)
    };
    let phases = if mask.mode.has_phase() {
        check(mask.phase, "phase")?.expect("checked").to_vec()
    } else {
        vec![0.0; n]
    };
    if let Some(p) = &mask.perturbation {
        if p.len() != n {
            return Err(Error::shape(format!("{n} perturbation factors"), p.len()));
        }
    }
    let phasors: Vec<Complex64> = phases
        .iter()
        .enumerate()
        .map(|(m, t)| {
            let base = Complex64::from_polar(1.0, 2.0 * PI * t);
            match &mask.perturbation {
                Some(p) => base * p[m],
                None => base,
            }
        })
        .collect();
    let factors = phasors.iter().zip(&amps).map(|(p, a)| p * a).collect();
    Ok(RealisedMask {
        factors,
        phasors,
        winner,
        max_abs,
    })
}
