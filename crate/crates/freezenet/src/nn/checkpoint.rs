//! Network checkpoint files: JSON with row-major weights.
//!
//! `{"layers":[{"w":[[...]],"b":[...],"act":"relu"}, ...]}`
//!
//! Floats are written in shortest-representation decimal, so loading a
//! checkpoint reproduces the exact bit pattern of every value.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, DenseLayer, Network, NnError};

#[derive(Serialize, Deserialize)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
    act: String,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    layers: Vec<LayerFile>,
}

pub fn to_checkpoint_json(net: &Network) -> String {
    let file = NetworkFile {
        layers: net
            .layers()
            .iter()
            .map(|l| LayerFile {
                w: (0..l.fan_in())
                    .map(|r| l.weights()[r * l.fan_out()..(r + 1) * l.fan_out()].to_vec())
                    .collect(),
                b: l.bias().to_vec(),
                act: l.activation().name().to_string(),
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("network serialization cannot fail")
}

pub fn from_checkpoint_json(text: &str) -> Result<Network, NnError> {
    let file: NetworkFile =
        serde_json::from_str(text).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, lf) in file.layers.into_iter().enumerate() {
        let fan_in = lf.w.len();
        let fan_out = lf.w.first().map_or(0, |r| r.len());
        if lf.w.iter().any(|r| r.len() != fan_out) {
            return Err(NnError::Checkpoint(format!("layer {i} has ragged weight rows")));
        }
        let weights = lf.w.into_iter().flatten().collect();
        layers.push(DenseLayer::new(
            fan_in,
            fan_out,
            weights,
            lf.b,
            Activation::from_name(&lf.act)?,
        )?);
    }
    Network::new(layers)
}

pub fn save_checkpoint(net: &Network, path: &Path) -> Result<(), NnError> {
    fs::write(path, to_checkpoint_json(net)).map_err(|e| NnError::Checkpoint(e.to_string()))
}

pub fn load_checkpoint(path: &Path) -> Result<Network, NnError> {
    let text = fs::read_to_string(path).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    from_checkpoint_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_glorot, InitKind};

    #[test]
    fn round_trip_is_bit_exact() {
        let net = init_glorot(
            &[5, 7, 3],
            &[Activation::Relu, Activation::Identity],
            InitKind::Normal,
            99,
        )
        .unwrap();
        let text = to_checkpoint_json(&net);
        let loaded = from_checkpoint_json(&text).unwrap();
        assert_eq!(net, loaded);
    }

    #[test]
    fn rejects_unknown_activation() {
        let text = r#"{"layers":[{"w":[[1.0]],"b":[0.0],"act":"gelu"}]}"#;
        assert!(from_checkpoint_json(text).is_err());
    }

    #[test]
    fn rejects_ragged_weights() {
        let text = r#"{"layers":[{"w":[[1.0,2.0],[3.0]],"b":[0.0,0.0],"act":"relu"}]}"#;
        assert!(from_checkpoint_json(text).is_err());
    }
}
