//! Minimal dense feed-forward networks with reverse-mode gradients.
//!
//! Everything is 64-bit floating point and deterministic given a seed.
//! Weight matrices are stored row-major with shape `fan_in x fan_out`,
//! matching the checkpoint file layout.

mod adam;
mod checkpoint;
mod grad;
mod init;
mod matrix;

pub use adam::{adam_step, AdamParams, AdamState};
pub use checkpoint::{from_checkpoint_json, load_checkpoint, save_checkpoint, to_checkpoint_json};
pub use grad::{loss_and_grads, Gradients, LayerGradients, LossKind, PROB_CLAMP};
pub use init::{init_glorot, InitKind};
pub use matrix::Matrix;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("optimizer state error: {0}")]
    State(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the post-activation value.
    pub(crate) fn derivative_from_output(&self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, NnError> {
        match name {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" => Ok(Activation::Identity),
            other => Err(NnError::Checkpoint(format!("unknown activation {other:?}"))),
        }
    }
}

/// One fully connected layer: weights `fan_in x fan_out`, one bias per
/// output unit, and an activation applied elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    fan_in: usize,
    fan_out: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(
        fan_in: usize,
        fan_out: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self, NnError> {
        if fan_in == 0 || fan_out == 0 {
            return Err(NnError::Architecture(format!(
                "layer dimensions must be positive, got {fan_in}x{fan_out}"
            )));
        }
        if weights.len() != fan_in * fan_out {
            return Err(NnError::Architecture(format!(
                "weight count {} does not match {fan_in}x{fan_out}",
                weights.len()
            )));
        }
        if bias.len() != fan_out {
            return Err(NnError::Architecture(format!(
                "bias count {} does not match fan_out {fan_out}",
                bias.len()
            )));
        }
        Ok(DenseLayer {
            fan_in,
            fan_out,
            weights,
            bias,
            activation,
        })
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
    }

    pub fn fan_out(&self) -> usize {
        self.fan_out
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.fan_out + col]
    }
}

/// A stack of dense layers with chained dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        if layers.is_empty() {
            return Err(NnError::Architecture("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].fan_out != pair[1].fan_in {
                return Err(NnError::Architecture(format!(
                    "layer dimensions do not chain: {} then {}",
                    pair[0].fan_out, pair[1].fan_in
                )));
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().fan_out
    }

    /// Layer dimension chain, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(|l| l.fan_out));
        dims
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|w| w.is_finite()) && l.bias.iter().all(|b| b.is_finite())
        })
    }
}

/// Run a feature batch through the network; rows are samples.
pub fn forward(net: &Network, x: &Matrix) -> Result<Matrix, NnError> {
    if x.cols() != net.input_dim() {
        return Err(NnError::Dimension(format!(
            "input has {} columns, network expects {}",
            x.cols(),
            net.input_dim()
        )));
    }
    let mut current = x.clone();
    for layer in &net.layers {
        current = layer_forward(layer, &current);
    }
    Ok(current)
}

pub(crate) fn layer_forward(layer: &DenseLayer, x: &Matrix) -> Matrix {
    let rows = x.rows();
    let mut out = Matrix::zeros(rows, layer.fan_out);
    for r in 0..rows {
        let xi = x.row(r);
        let oi = out.row_mut(r);
        oi.copy_from_slice(&layer.bias);
        for (k, &xv) in xi.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let wrow = &layer.weights[k * layer.fan_out..(k + 1) * layer.fan_out];
            for (o, &w) in oi.iter_mut().zip(wrow) {
                *o += xv * w;
            }
        }
        for o in oi.iter_mut() {
            *o = layer.activation.apply(*o);
        }
    }
    out
}

/// Classification accuracy and mean loss over a labelled feature batch.
/// Binary cross-entropy thresholds the single output at 0.5; softmax
/// cross-entropy takes the argmax.
pub fn evaluate(
    net: &Network,
    features: &Matrix,
    labels: &[u32],
    loss: LossKind,
) -> Result<(f64, f64), NnError> {
    if features.rows() == 0 {
        return Err(NnError::Data("cannot evaluate on an empty dataset".into()));
    }
    if features.rows() != labels.len() {
        return Err(NnError::Data(format!(
            "{} feature rows but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    loss.check_labels(labels, net.output_dim())?;
    let outputs = forward(net, features)?;
    let mut correct = 0usize;
    for (r, &label) in labels.iter().enumerate() {
        let row = outputs.row(r);
        let predicted = match loss {
            LossKind::BinaryCrossEntropy => u32::from(row[0] > 0.5),
            LossKind::SoftmaxCrossEntropy => {
                let mut best = 0usize;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best as u32
            }
        };
        if predicted == label {
            correct += 1;
        }
    }
    let mean_loss = loss.mean_loss(&outputs, labels);
    Ok((correct as f64 / labels.len() as f64, mean_loss))
}
