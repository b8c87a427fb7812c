//! Controlled-experiment orchestration.
//!
//! Conditions differ only in how signs are initialized and whether they
//! are enforced; everything else — weight magnitudes, batch sequences,
//! validation samples — is a pure function of the trial's seed tuple and
//! therefore identical across conditions. Weight-transfer conditions are
//! the one sanctioned exception: they copy the source network's weights.

mod config;
mod report;
mod sweep;
mod transfer;
mod trial;

pub use config::{ExperimentConfig, TaskSpec, TransferConfig};
pub use report::{
    histories_to_jsonl, read_histories_jsonl, render_aggregate_csv, render_significance_csv,
    write_atomic, write_manifest, Manifest,
};
pub use sweep::{aggregate, run_xor_sweep, AggregateRow, SweepResult};
pub use transfer::{run_transfer_experiment, SignificanceRow, TransferResult};
pub use trial::{build_initial_network, run_trial, TransferSource, TrialSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;
use crate::nn::{Network, NnError};
use crate::polarity::PolarityError;
use crate::seeds;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("source network reached only {accuracy:.4} validation accuracy, floor is {floor}")]
    SourceBelowFloor { accuracy: f64, floor: f64 },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Polarity(#[from] PolarityError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// The experimental conditions: sign source x sign treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    FrozenSufficient,
    FrozenRandom,
    FluidRandom,
    FluidTransferredPolarity,
    FrozenTransferredPolarity,
    FluidTransferredWeight,
    FrozenTransferredWeight,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::FrozenSufficient,
        Condition::FrozenRandom,
        Condition::FluidRandom,
        Condition::FluidTransferredPolarity,
        Condition::FrozenTransferredPolarity,
        Condition::FluidTransferredWeight,
        Condition::FrozenTransferredWeight,
    ];

    /// Signs are enforced after every batch.
    pub fn is_frozen(&self) -> bool {
        matches!(
            self,
            Condition::FrozenSufficient
                | Condition::FrozenRandom
                | Condition::FrozenTransferredPolarity
                | Condition::FrozenTransferredWeight
        )
    }

    /// Initial weights are copied from the source network instead of the
    /// trial's own magnitude draw.
    pub fn transfers_weights(&self) -> bool {
        matches!(
            self,
            Condition::FluidTransferredWeight | Condition::FrozenTransferredWeight
        )
    }

    /// Needs a trained source network to derive signs or weights from.
    pub fn needs_source(&self) -> bool {
        matches!(
            self,
            Condition::FluidTransferredPolarity
                | Condition::FrozenTransferredPolarity
                | Condition::FluidTransferredWeight
                | Condition::FrozenTransferredWeight
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Condition::FrozenSufficient => "frozen_sufficient",
            Condition::FrozenRandom => "frozen_random",
            Condition::FluidRandom => "fluid_random",
            Condition::FluidTransferredPolarity => "fluid_transferred_polarity",
            Condition::FrozenTransferredPolarity => "frozen_transferred_polarity",
            Condition::FluidTransferredWeight => "fluid_transferred_weight",
            Condition::FrozenTransferredWeight => "frozen_transferred_weight",
        }
    }
}

/// Independent sub-seeds for one trial. All conditions of a trial share
/// the tuple; that is the control contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTuple {
    pub data: u64,
    pub magnitude: u64,
    pub polarity: u64,
    pub batch: u64,
}

impl SeedTuple {
    pub fn for_trial(seed_base: u64, trial: u64) -> Self {
        SeedTuple {
            data: seeds::derive(seed_base, "data", trial),
            magnitude: seeds::derive(seed_base, "magnitude", trial),
            polarity: seeds::derive(seed_base, "polarity", trial),
            batch: seeds::derive(seed_base, "batch", trial),
        }
    }
}

/// Per-epoch record of one seeded training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialHistory {
    pub condition: Condition,
    pub train_size: usize,
    pub hidden_size: usize,
    pub trial: u64,
    pub seeds: SeedTuple,
    pub train_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    pub val_error: Vec<f64>,
    /// Per epoch, per layer: fraction of weights whose sign flipped
    /// since the previous epoch snapshot.
    pub flip_ratios: Vec<Vec<f64>>,
    /// Weights corrected by enforcement, summed per epoch. Empty for
    /// fluid conditions.
    pub corrections: Vec<u64>,
    pub diverged: bool,
}

/// First epoch (1-indexed) whose validation accuracy reaches the
/// threshold, if any. The threshold must lie strictly inside (0, 1).
pub fn epochs_to_threshold(history: &TrialHistory, threshold: f64) -> Option<usize> {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "threshold must be in (0, 1), got {threshold}"
    );
    history
        .val_accuracy
        .iter()
        .position(|&acc| acc >= threshold)
        .map(|i| i + 1)
}

/// Validation error at the last epoch of the fixed budget.
pub fn final_error(history: &TrialHistory) -> f64 {
    *history
        .val_error
        .last()
        .expect("history must cover at least one epoch")
}

/// Pooled histogram of weight magnitudes over the given bin edges;
/// values outside the edges are dropped.
pub fn magnitude_histogram(nets: &[&Network], edges: &[f64]) -> Result<Vec<u64>, HarnessError> {
    if nets.is_empty() {
        return Err(HarnessError::Config("need at least one network".into()));
    }
    if edges.len() < 2 {
        return Err(HarnessError::Config("need at least two bin edges".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Config("bin edges must increase strictly".into()));
    }
    let mut counts = vec![0u64; edges.len() - 1];
    for net in nets {
        for layer in net.layers() {
            for &w in layer.weights() {
                let m = w.abs();
                if let Some(bin) = edges.windows(2).position(|e| m >= e[0] && m < e[1]) {
                    counts[bin] += 1;
                }
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_glorot, Activation, InitKind};

    fn history(val_accuracy: Vec<f64>) -> TrialHistory {
        let epochs = val_accuracy.len();
        TrialHistory {
            condition: Condition::FluidRandom,
            train_size: 60,
            hidden_size: 8,
            trial: 0,
            seeds: SeedTuple::for_trial(1, 0),
            train_loss: vec![0.5; epochs],
            val_error: val_accuracy.iter().map(|a| 1.0 - a).collect(),
            val_accuracy,
            flip_ratios: vec![vec![0.0, 0.0]; epochs],
            corrections: vec![],
            diverged: false,
        }
    }

    #[test]
    fn epochs_to_threshold_finds_first_crossing() {
        let h = history(vec![0.5, 0.7, 0.85]);
        assert_eq!(epochs_to_threshold(&h, 0.8), Some(3));
        assert_eq!(epochs_to_threshold(&h, 0.9), None);
        // A threshold below every accuracy is reached at epoch 1.
        assert_eq!(epochs_to_threshold(&h, 0.4), Some(1));
    }

    #[test]
    #[should_panic(expected = "threshold")]
    fn epochs_to_threshold_rejects_degenerate_threshold() {
        let h = history(vec![0.5]);
        epochs_to_threshold(&h, 0.0);
    }

    #[test]
    fn final_error_is_one_minus_last_accuracy() {
        let h = history(vec![0.8, 0.8, 0.8]);
        assert_eq!(final_error(&h), 1.0 - 0.8);
    }

    #[test]
    fn seed_tuples_differ_by_trial_and_stream() {
        let a = SeedTuple::for_trial(9, 0);
        let b = SeedTuple::for_trial(9, 1);
        assert_eq!(a, SeedTuple::for_trial(9, 0));
        assert_ne!(a, b);
        assert_ne!(a.data, a.magnitude);
        assert_ne!(a.polarity, a.batch);
    }

    #[test]
    fn histogram_counts_and_validation() {
        let net = init_glorot(
            &[4, 4, 1],
            &[Activation::Relu, Activation::Sigmoid],
            InitKind::Uniform,
            3,
        )
        .unwrap();
        let edges = [0.0, 0.25, 0.5, 1.0];
        let counts = magnitude_histogram(&[&net], &edges).unwrap();
        assert_eq!(counts.iter().sum::<u64>() as usize, net.weight_count());
        assert!(magnitude_histogram(&[&net], &[0.5]).is_err());
        assert!(magnitude_histogram(&[], &edges).is_err());
        assert!(magnitude_histogram(&[&net], &[0.2, 0.2, 0.4]).is_err());
    }
}
