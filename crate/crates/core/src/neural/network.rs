//! Dense feedforward network with dropout and exact backpropagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg;
use super::NeuralError;
use crate::mat::Matrix;

/// Negative slope of the leaky ReLU.
pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    LeakyRelu,
    Sigmoid,
}

/// Largest f64 strictly below 1, so the sigmoid keeps its open range even
/// where rounding would snap `1/(1+e^-z)` to exactly 1.
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
            Activation::Sigmoid => {
                (1.0 / (1.0 + (-z).exp())).clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP)
            }
        }
    }

    /// Derivative given the pre-activation and the activation value.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::LeakyRelu => "leaky_relu",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "leaky_relu" => Some(Activation::LeakyRelu),
            "sigmoid" => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// One affine layer: row-major weights (out x in), biases, activation, and a
/// dropout rate applied after the activation (hidden layers only).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub activation: Activation,
    pub dropout: f64,
}

impl Layer {
    pub fn fan_in(&self) -> usize {
        self.weights.cols
    }

    pub fn fan_out(&self) -> usize {
        self.weights.rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    pub layers: Vec<Layer>,
}

/// Cached intermediates from one batch forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    /// Input to each layer (after the previous layer's dropout).
    inputs: Vec<Matrix>,
    /// Pre-activations per layer.
    pre_acts: Vec<Matrix>,
    /// Post-activation outputs per layer (before dropout).
    activations: Vec<Matrix>,
    /// Dropout multipliers per layer output (`0` or `1/(1-rate)`), absent in
    /// eval mode or for the output layer.
    masks: Vec<Option<Matrix>>,
    batch: usize,
}

/// Parameter gradients mirroring the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weights.rows, l.weights.cols))
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let w = self.weights.iter().flat_map(|m| m.data.iter());
        let b = self.biases.iter().flatten();
        w.chain(b).fold(0.0f64, |acc, &g| acc.max(g.abs()))
    }
}

impl DenseNetwork {
    /// Build a network with Xavier-uniform weights
    /// (`+-sqrt(6/(fan_in+fan_out))`) and zero biases, deterministically from
    /// the seed. `dropouts[i]` applies after layer `i`'s activation; the
    /// output layer ignores it.
    pub fn init(
        dims: &[usize],
        activations: &[Activation],
        dropouts: &[f64],
        seed: u64,
    ) -> Result<Self, NeuralError> {
        if dims.len() < 2 {
            return Err(NeuralError::BadDimensions("need at least input and output dims".into()));
        }
        if activations.len() != dims.len() - 1 || dropouts.len() != dims.len() - 1 {
            return Err(NeuralError::BadDimensions(format!(
                "{} layers need {} activations and dropout rates, got {} and {}",
                dims.len() - 1,
                dims.len() - 1,
                activations.len(),
                dropouts.len()
            )));
        }
        if dims.contains(&0) {
            return Err(NeuralError::BadDimensions("zero-width layer".into()));
        }
        if dropouts.iter().any(|d| !(0.0..1.0).contains(d)) {
            return Err(NeuralError::BadDimensions("dropout rate must be in [0, 1)".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = (0..dims.len() - 1)
            .map(|l| {
                let (fan_in, fan_out) = (dims[l], dims[l + 1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data =
                    (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect();
                Layer {
                    weights: Matrix { rows: fan_out, cols: fan_in, data },
                    biases: vec![0.0; fan_out],
                    activation: activations[l],
                    dropout: if l == dims.len() - 2 { 0.0 } else { dropouts[l] },
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().fan_out()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Layer::fan_out));
        dims
    }

    /// Total trainable parameters: `sum(fan_in * fan_out + fan_out)`.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.data.len() + l.biases.len()).sum()
    }

    /// Batch forward pass. In train mode, dropout masks for all hidden
    /// layers are drawn from `rng` up front (row-major per layer) so the
    /// result does not depend on execution order.
    pub fn forward_batch(
        &self,
        input: &Matrix,
        mode: Mode,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Matrix, Tape), NeuralError> {
        self.forward_impl(input, mode, rng, cfg!(feature = "parallel"))
    }

    /// Sequential reference path for [`DenseNetwork::forward_batch`];
    /// bit-identical output.
    pub fn forward_batch_sequential(
        &self,
        input: &Matrix,
        mode: Mode,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Matrix, Tape), NeuralError> {
        self.forward_impl(input, mode, rng, false)
    }

    fn forward_impl(
        &self,
        input: &Matrix,
        mode: Mode,
        mut rng: Option<&mut ChaCha8Rng>,
        parallel: bool,
    ) -> Result<(Matrix, Tape), NeuralError> {
        if input.cols != self.input_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.input_dim(),
                found: input.cols,
            });
        }
        let batch = input.rows;

        // Pre-draw dropout masks in a fixed order.
        let masks: Vec<Option<Matrix>> = self
            .layers
            .iter()
            .map(|layer| {
                if mode == Mode::Train && layer.dropout > 0.0 {
                    let rng = rng.as_deref_mut().expect("train mode requires an rng");
                    let keep_scale = 1.0 / (1.0 - layer.dropout);
                    let data = (0..batch * layer.fan_out())
                        .map(|_| {
                            if rng.random::<f64>() < layer.dropout {
                                0.0
                            } else {
                                keep_scale
                            }
                        })
                        .collect();
                    Some(Matrix { rows: batch, cols: layer.fan_out(), data })
                } else {
                    None
                }
            })
            .collect();

        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_acts = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut current = input.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let z = if parallel {
                linalg::affine(&current, &layer.weights, &layer.biases)
            } else {
                linalg::affine_sequential(&current, &layer.weights, &layer.biases)
            };
            let mut act = z.clone();
            for v in act.data.iter_mut() {
                *v = layer.activation.apply(*v);
            }
            let mut next = act.clone();
            if let Some(mask) = &masks[l] {
                for (v, &m) in next.data.iter_mut().zip(&mask.data) {
                    *v *= m;
                }
            }
            inputs.push(std::mem::replace(&mut current, next));
            pre_acts.push(z);
            activations.push(act);
        }

        let tape = Tape { inputs, pre_acts, activations, masks, batch };
        Ok((current, tape))
    }

    /// Single-vector eval-mode forward pass (no dropout, no tape).
    pub fn forward_eval(&self, input: &[f64]) -> Result<Vec<f64>, NeuralError> {
        let m = Matrix { rows: 1, cols: input.len(), data: input.to_vec() };
        let (out, _) = self.forward_batch_sequential(&m, Mode::Eval, None)?;
        Ok(out.data)
    }

    /// Backpropagate `grad_output` (dL/d output activations) through the
    /// network. Returns the parameter gradients (when `want_params`) and the
    /// gradient with respect to the network input.
    pub fn backward(
        &self,
        tape: &Tape,
        grad_output: &Matrix,
        want_params: bool,
    ) -> Result<(Option<Gradients>, Matrix), NeuralError> {
        self.backward_impl(tape, grad_output, want_params, cfg!(feature = "parallel"))
    }

    /// Sequential reference path for [`DenseNetwork::backward`];
    /// bit-identical output.
    pub fn backward_sequential(
        &self,
        tape: &Tape,
        grad_output: &Matrix,
        want_params: bool,
    ) -> Result<(Option<Gradients>, Matrix), NeuralError> {
        self.backward_impl(tape, grad_output, want_params, false)
    }

    fn backward_impl(
        &self,
        tape: &Tape,
        grad_output: &Matrix,
        want_params: bool,
        parallel: bool,
    ) -> Result<(Option<Gradients>, Matrix), NeuralError> {
        if tape.inputs.len() != self.layers.len() {
            return Err(NeuralError::TapeMismatch(format!(
                "tape has {} layers, network has {}",
                tape.inputs.len(),
                self.layers.len()
            )));
        }
        if grad_output.rows != tape.batch || grad_output.cols != self.output_dim() {
            return Err(NeuralError::TapeMismatch(format!(
                "output grad is {}x{}, expected {}x{}",
                grad_output.rows,
                grad_output.cols,
                tape.batch,
                self.output_dim()
            )));
        }

        let mut grads = want_params.then(|| Gradients::zeros_like(self));
        let mut grad_act = grad_output.clone();

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            // through dropout (last layer never has a mask)
            if let Some(mask) = &tape.masks[l] {
                for (g, &m) in grad_act.data.iter_mut().zip(&mask.data) {
                    *g *= m;
                }
            }
            // through the activation
            let mut delta = grad_act;
            for ((g, &z), &a) in
                delta.data.iter_mut().zip(&tape.pre_acts[l].data).zip(&tape.activations[l].data)
            {
                *g *= layer.activation.derivative(z, a);
            }
            if let Some(grads) = grads.as_mut() {
                grads.weights[l] = if parallel {
                    linalg::grad_weights(&delta, &tape.inputs[l])
                } else {
                    linalg::grad_weights_sequential(&delta, &tape.inputs[l])
                };
                grads.biases[l] = linalg::grad_bias(&delta);
            }
            grad_act = if parallel {
                linalg::backprop_input(&delta, &layer.weights)
            } else {
                linalg::backprop_input_sequential(&delta, &layer.weights)
            };
        }
        Ok((grads, grad_act))
    }
}
