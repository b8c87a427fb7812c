//! Loss functions and reverse-mode gradients.

use super::{layer_forward, Activation, Matrix, Network, NnError};

/// Probabilities are clamped to [PROB_CLAMP, 1 - PROB_CLAMP] before any
/// logarithm so cross-entropy stays finite.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Single sigmoid output against labels in {0, 1}.
    BinaryCrossEntropy,
    /// Softmax over the output row against labels in [0, classes).
    SoftmaxCrossEntropy,
}

impl LossKind {
    pub(crate) fn check_labels(&self, labels: &[u32], output_dim: usize) -> Result<(), NnError> {
        match self {
            LossKind::BinaryCrossEntropy => {
                if output_dim != 1 {
                    return Err(NnError::Data(format!(
                        "binary cross-entropy needs output dimension 1, network has {output_dim}"
                    )));
                }
                if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
                    return Err(NnError::Data(format!("binary label {bad} out of range")));
                }
            }
            LossKind::SoftmaxCrossEntropy => {
                if let Some(&bad) = labels.iter().find(|&&l| l as usize >= output_dim) {
                    return Err(NnError::Data(format!(
                        "label {bad} out of range for {output_dim} outputs"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Mean loss over the batch given network outputs.
    pub(crate) fn mean_loss(&self, outputs: &Matrix, labels: &[u32]) -> f64 {
        let n = labels.len() as f64;
        match self {
            LossKind::BinaryCrossEntropy => {
                let mut total = 0.0;
                for (r, &y) in labels.iter().enumerate() {
                    let p = outputs.get(r, 0).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                    total -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
                }
                total / n
            }
            LossKind::SoftmaxCrossEntropy => {
                let mut total = 0.0;
                for (r, &y) in labels.iter().enumerate() {
                    let probs = softmax_row(outputs.row(r));
                    total -= probs[y as usize].max(PROB_CLAMP).ln();
                }
                total / n
            }
        }
    }
}

fn softmax_row(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub d_weights: Vec<f64>,
    pub d_bias: Vec<f64>,
}

/// Parameter gradients, one entry per layer, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGradients {
                    d_weights: vec![0.0; l.weights().len()],
                    d_bias: vec![0.0; l.bias().len()],
                })
                .collect(),
        }
    }
}

/// Mean loss and its gradients with respect to every weight and bias.
pub fn loss_and_grads(
    net: &Network,
    features: &Matrix,
    labels: &[u32],
    loss: LossKind,
) -> Result<(f64, Gradients), NnError> {
    if features.rows() == 0 {
        return Err(NnError::Data("empty batch".into()));
    }
    if features.rows() != labels.len() {
        return Err(NnError::Data(format!(
            "{} feature rows but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    if features.cols() != net.input_dim() {
        return Err(NnError::Dimension(format!(
            "input has {} columns, network expects {}",
            features.cols(),
            net.input_dim()
        )));
    }
    loss.check_labels(labels, net.output_dim())?;

    // Forward pass, keeping every layer's post-activation.
    let mut activations: Vec<Matrix> = Vec::with_capacity(net.layers().len() + 1);
    activations.push(features.clone());
    for layer in net.layers() {
        let next = layer_forward(layer, activations.last().unwrap());
        activations.push(next);
    }
    let outputs = activations.last().unwrap();
    let n = labels.len() as f64;
    let loss_value = loss.mean_loss(outputs, labels);

    // Gradient of the mean loss with respect to the last layer's
    // pre-activation. Sigmoid + binary cross-entropy is fused so the
    // clamp never produces a blown-up intermediate.
    let last_activation = net.layers().last().unwrap().activation();
    let mut delta = Matrix::zeros(outputs.rows(), outputs.cols());
    match (loss, last_activation) {
        (LossKind::BinaryCrossEntropy, Activation::Sigmoid) => {
            for (r, &y) in labels.iter().enumerate() {
                let p = outputs.get(r, 0).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                delta.set(r, 0, (p - f64::from(y)) / n);
            }
        }
        (LossKind::BinaryCrossEntropy, act) => {
            for (r, &y) in labels.iter().enumerate() {
                let p = outputs.get(r, 0).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                let d_output = (p - f64::from(y)) / (p * (1.0 - p)) / n;
                delta.set(r, 0, d_output * act.derivative_from_output(outputs.get(r, 0)));
            }
        }
        (LossKind::SoftmaxCrossEntropy, act) => {
            for (r, &y) in labels.iter().enumerate() {
                let probs = softmax_row(outputs.row(r));
                for (c, &p) in probs.iter().enumerate() {
                    let d_output = (p - f64::from(c as u32 == y)) / n;
                    delta.set(
                        r,
                        c,
                        d_output * act.derivative_from_output(outputs.get(r, c)),
                    );
                }
            }
        }
    }

    // Backward pass.
    let mut grads = Gradients::zeros_like(net);
    for (l, layer) in net.layers().iter().enumerate().rev() {
        let input = &activations[l];
        let lg = &mut grads.layers[l];
        for r in 0..delta.rows() {
            let drow = delta.row(r);
            let xrow = input.row(r);
            for (k, &xv) in xrow.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                let wgrad = &mut lg.d_weights[k * layer.fan_out()..(k + 1) * layer.fan_out()];
                for (g, &d) in wgrad.iter_mut().zip(drow) {
                    *g += xv * d;
                }
            }
            for (g, &d) in lg.d_bias.iter_mut().zip(drow) {
                *g += d;
            }
        }
        if l > 0 {
            let prev_activation = net.layers()[l - 1].activation();
            let mut prev_delta = Matrix::zeros(delta.rows(), layer.fan_in());
            for r in 0..delta.rows() {
                let drow = delta.row(r);
                for k in 0..layer.fan_in() {
                    let wrow = &layer.weights()[k * layer.fan_out()..(k + 1) * layer.fan_out()];
                    let mut acc = 0.0;
                    for (&w, &d) in wrow.iter().zip(drow) {
                        acc += w * d;
                    }
                    let a = input.get(r, k);
                    prev_delta.set(r, k, acc * prev_activation.derivative_from_output(a));
                }
            }
            delta = prev_delta;
        }
    }
    Ok((loss_value, grads))
}
