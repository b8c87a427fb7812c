//! Adam optimizer with bias correction.

use super::{Gradients, Network, NnError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamParams {
    pub fn with_lr(lr: f64) -> Self {
        AdamParams {
            lr,
            ..AdamParams::default()
        }
    }
}

#[derive(Debug, Clone)]
struct Moments {
    w_first: Vec<f64>,
    w_second: Vec<f64>,
    b_first: Vec<f64>,
    b_second: Vec<f64>,
}

/// First/second-moment accumulators shaped like the network parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    params: AdamParams,
    moments: Vec<Moments>,
    step: u64,
}

impl AdamState {
    pub fn new(net: &Network, params: AdamParams) -> Self {
        let moments = net
            .layers()
            .iter()
            .map(|l| Moments {
                w_first: vec![0.0; l.weights().len()],
                w_second: vec![0.0; l.weights().len()],
                b_first: vec![0.0; l.bias().len()],
                b_second: vec![0.0; l.bias().len()],
            })
            .collect();
        AdamState {
            params,
            moments,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn params(&self) -> AdamParams {
        self.params
    }
}

/// One Adam update in place. The state's step counter increases by one.
pub fn adam_step(
    net: &mut Network,
    grads: &Gradients,
    state: &mut AdamState,
) -> Result<(), NnError> {
    if grads.layers.len() != net.layers().len() || state.moments.len() != net.layers().len() {
        return Err(NnError::State("gradient/state layer count mismatch".into()));
    }
    for ((layer, lg), m) in net
        .layers()
        .iter()
        .zip(&grads.layers)
        .zip(&state.moments)
    {
        if lg.d_weights.len() != layer.weights().len()
            || lg.d_bias.len() != layer.bias().len()
            || m.w_first.len() != layer.weights().len()
        {
            return Err(NnError::State("gradient/state shape mismatch".into()));
        }
    }
    state.step += 1;
    let p = state.params;
    let correction1 = 1.0 - p.beta1.powi(state.step as i32);
    let correction2 = 1.0 - p.beta2.powi(state.step as i32);
    for (layer, (lg, m)) in net
        .layers_mut()
        .iter_mut()
        .zip(grads.layers.iter().zip(state.moments.iter_mut()))
    {
        update_slice(
            layer.weights_mut(),
            &lg.d_weights,
            &mut m.w_first,
            &mut m.w_second,
            p,
            correction1,
            correction2,
        );
        update_slice(
            layer.bias_mut(),
            &lg.d_bias,
            &mut m.b_first,
            &mut m.b_second,
            p,
            correction1,
            correction2,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update_slice(
    values: &mut [f64],
    grads: &[f64],
    first: &mut [f64],
    second: &mut [f64],
    p: AdamParams,
    correction1: f64,
    correction2: f64,
) {
    for i in 0..values.len() {
        let g = grads[i];
        first[i] = p.beta1 * first[i] + (1.0 - p.beta1) * g;
        second[i] = p.beta2 * second[i] + (1.0 - p.beta2) * g * g;
        let m_hat = first[i] / correction1;
        let v_hat = second[i] / correction2;
        values[i] -= p.lr * m_hat / (v_hat.sqrt() + p.eps);
    }
}
