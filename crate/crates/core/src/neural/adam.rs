//! ADAM optimizer with bias correction.

use super::network::{DenseNetwork, Gradients};
use super::NeuralError;
use crate::mat::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moment accumulators mirroring the network parameters, plus
/// the shared step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m_weights: Vec<Matrix>,
    pub v_weights: Vec<Matrix>,
    pub m_biases: Vec<Vec<f64>>,
    pub v_biases: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        Self {
            m_weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weights.rows, l.weights.cols))
                .collect(),
            v_weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weights.rows, l.weights.cols))
                .collect(),
            m_biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            v_biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            step: 0,
        }
    }
}

#[inline]
fn update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    cfg: &AdamConfig,
    lr_t: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        params[i] -= lr_t * m[i] / (v[i].sqrt() + cfg.epsilon);
    }
}

/// One ADAM update. Bias correction is folded into the step size:
/// `lr_t = rate * sqrt(1 - beta2^t) / (1 - beta1^t)`, then
/// `p -= lr_t * m / (sqrt(v) + eps)`.
pub fn adam_step(
    net: &mut DenseNetwork,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &AdamConfig,
    rate: f64,
) -> Result<(), NeuralError> {
    if grads.weights.len() != net.layers.len() || grads.biases.len() != net.layers.len() {
        return Err(NeuralError::ShapeMismatch("gradient layer count".into()));
    }
    for (l, layer) in net.layers.iter().enumerate() {
        if grads.weights[l].rows != layer.weights.rows
            || grads.weights[l].cols != layer.weights.cols
            || grads.biases[l].len() != layer.biases.len()
        {
            return Err(NeuralError::ShapeMismatch(format!("gradient shape at layer {l}")));
        }
    }

    state.step += 1;
    let t = state.step as f64;
    let lr_t = rate * (1.0 - cfg.beta2.powf(t)).sqrt() / (1.0 - cfg.beta1.powf(t));
    for (l, layer) in net.layers.iter_mut().enumerate() {
        update_slice(
            &mut layer.weights.data,
            &grads.weights[l].data,
            &mut state.m_weights[l].data,
            &mut state.v_weights[l].data,
            cfg,
            lr_t,
        );
        update_slice(
            &mut layer.biases,
            &grads.biases[l],
            &mut state.m_biases[l],
            &mut state.v_biases[l],
            cfg,
            lr_t,
        );
    }
    Ok(())
}
