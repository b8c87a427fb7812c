//! Glorot weight initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Activation, DenseLayer, Network, NnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Uniform,
    Normal,
}

/// Build a network with Glorot-initialized weights and zero biases.
/// Uniform draws from +-sqrt(6 / (fan_in + fan_out)); Normal uses
/// standard deviation sqrt(2 / (fan_in + fan_out)). Deterministic for a
/// fixed seed.
pub fn init_glorot(
    dims: &[usize],
    activations: &[Activation],
    kind: InitKind,
    seed: u64,
) -> Result<Network, NnError> {
    if dims.len() < 2 {
        return Err(NnError::Architecture(
            "need at least an input and an output dimension".into(),
        ));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(NnError::Architecture("all dimensions must be >= 1".into()));
    }
    if activations.len() != dims.len() - 1 {
        return Err(NnError::Architecture(format!(
            "{} activations for {} layers",
            activations.len(),
            dims.len() - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (i, pair) in dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let scale = (fan_in + fan_out) as f64;
        let mut weights = Vec::with_capacity(fan_in * fan_out);
        match kind {
            InitKind::Uniform => {
                let limit = (6.0 / scale).sqrt();
                for _ in 0..fan_in * fan_out {
                    weights.push(rng.random_range(-limit..limit));
                }
            }
            InitKind::Normal => {
                let normal = Normal::new(0.0, (2.0 / scale).sqrt()).unwrap();
                for _ in 0..fan_in * fan_out {
                    weights.push(normal.sample(&mut rng));
                }
            }
        }
        layers.push(DenseLayer::new(
            fan_in,
            fan_out,
            weights,
            vec![0.0; fan_out],
            activations[i],
        )?);
    }
    Network::new(layers)
}
