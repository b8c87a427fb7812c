//! Experiment configuration files.
//!
//! Configs are archival artifacts: a run is a pure function of the
//! config and its seed, so re-running one reproduces every output file
//! byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Condition, HarnessError};
use crate::data::{gen_synth_images, gen_xor, load_idx, Dataset, SynthImageSpec};
use crate::nn::{Activation, LossKind};
use crate::polarity::ResetMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    /// Synthetic XOR task in `dim` dimensions (the first two carry the
    /// label, the rest are noise).
    Xor { dim: usize },
    /// Synthetic two-class image task.
    SynthImages {
        side: usize,
        noise: f64,
        task_seed: u64,
    },
    /// IDX image/label files on disk.
    Idx { images: PathBuf, labels: PathBuf },
}

impl TaskSpec {
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            TaskSpec::Xor { dim } => Some(*dim),
            TaskSpec::SynthImages { side, .. } => Some(side * side),
            TaskSpec::Idx { .. } => None,
        }
    }

    /// Produce (or load) at least `n` samples with the given seed.
    pub fn materialize(&self, n: usize, seed: u64) -> Result<Dataset, HarnessError> {
        match self {
            TaskSpec::Xor { dim } => Ok(gen_xor(n, *dim, seed)?),
            TaskSpec::SynthImages {
                side,
                noise,
                task_seed,
            } => {
                let spec = SynthImageSpec {
                    side: *side,
                    noise: *noise,
                    task_seed: *task_seed,
                };
                Ok(gen_synth_images(&spec, n, seed)?)
            }
            TaskSpec::Idx { images, labels } => {
                let data = load_idx(images, labels)?;
                if data.len() < n {
                    return Err(HarnessError::Config(format!(
                        "task: IDX files hold {} samples, {n} needed",
                        data.len()
                    )));
                }
                Ok(data)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub source_task: TaskSpec,
    pub source_train_size: usize,
    pub source_epochs: usize,
    /// Refuse to transfer from a source below this validation accuracy.
    pub floor_accuracy: f64,
}

pub const DEFAULT_VALIDATION_SIZE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskSpec,
    /// Full layer dimension chain, input first.
    pub arch: Vec<usize>,
    pub conditions: Vec<Condition>,
    pub train_sizes: Vec<usize>,
    /// When nonempty, sweeps the hidden width of a single-hidden-layer
    /// `arch` over these values.
    #[serde(default)]
    pub hidden_sizes: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub trials: u64,
    /// Validation-accuracy thresholds; the first is the primary one used
    /// for success rates.
    pub thresholds: Vec<f64>,
    pub reset_method: ResetMethod,
    pub epsilon: f64,
    pub seed_base: u64,
    #[serde(default)]
    pub validation_size: Option<usize>,
    #[serde(default)]
    pub transfer: Option<TransferConfig>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validation_size(&self) -> usize {
        self.validation_size.unwrap_or(DEFAULT_VALIDATION_SIZE)
    }

    pub fn loss_kind(&self) -> LossKind {
        if *self.arch.last().unwrap_or(&1) == 1 {
            LossKind::BinaryCrossEntropy
        } else {
            LossKind::SoftmaxCrossEntropy
        }
    }

    /// ReLU hidden layers; sigmoid output for a single binary output,
    /// identity (logits into softmax) otherwise.
    pub fn activations(&self) -> Vec<Activation> {
        let n_layers = self.arch.len() - 1;
        let mut acts = vec![Activation::Relu; n_layers];
        acts[n_layers - 1] = match self.loss_kind() {
            LossKind::BinaryCrossEntropy => Activation::Sigmoid,
            LossKind::SoftmaxCrossEntropy => Activation::Identity,
        };
        acts
    }

    /// Architectures actually swept: `arch` with its hidden width
    /// replaced by each entry of `hidden_sizes` (or `arch` as-is).
    pub fn swept_archs(&self) -> Result<Vec<(usize, Vec<usize>)>, HarnessError> {
        if self.hidden_sizes.is_empty() {
            let hidden = if self.arch.len() == 3 { self.arch[1] } else { 0 };
            return Ok(vec![(hidden, self.arch.clone())]);
        }
        if self.arch.len() != 3 {
            return Err(HarnessError::Config(
                "hidden_sizes: hidden-width sweeps need a single-hidden-layer arch".into(),
            ));
        }
        Ok(self
            .hidden_sizes
            .iter()
            .map(|&h| (h, vec![self.arch[0], h, self.arch[2]]))
            .collect())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.arch.len() < 2 {
            return fail("arch: need at least input and output dimensions".into());
        }
        if self.arch.iter().any(|&d| d == 0) {
            return fail("arch: dimensions must be >= 1".into());
        }
        if let Some(dim) = self.task.input_dim() {
            if self.arch[0] != dim {
                return fail(format!(
                    "arch: input width {} does not match task dimension {dim}",
                    self.arch[0]
                ));
            }
        }
        if self.conditions.is_empty() {
            return fail("conditions: must be nonempty".into());
        }
        if self.train_sizes.is_empty() || self.train_sizes.contains(&0) {
            return fail("train_sizes: must be nonempty and positive".into());
        }
        if self.hidden_sizes.contains(&0) {
            return fail("hidden_sizes: entries must be >= 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs: must be >= 1".into());
        }
        if !(self.lr > 0.0) {
            return fail(format!("lr: must be positive, got {}", self.lr));
        }
        if self.batch_size == 0 {
            return fail("batch_size: must be >= 1".into());
        }
        if self.trials == 0 {
            return fail("trials: must be >= 1".into());
        }
        if self.thresholds.is_empty() {
            return fail("thresholds: must be nonempty".into());
        }
        if self.thresholds.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return fail("thresholds: entries must lie in (0, 1)".into());
        }
        if self.reset_method.needs_epsilon() && !(self.epsilon > 0.0) {
            return fail(format!(
                "epsilon: must be positive for {:?}",
                self.reset_method
            ));
        }
        if self
            .conditions
            .iter()
            .any(|c| c.needs_source() && self.transfer.is_none())
        {
            return fail("transfer: required by the transferred-polarity/weight conditions".into());
        }
        if let Some(t) = &self.transfer {
            if !(t.floor_accuracy > 0.0 && t.floor_accuracy < 1.0) {
                return fail("transfer.floor_accuracy: must lie in (0, 1)".into());
            }
            if t.source_epochs == 0 || t.source_train_size == 0 {
                return fail("transfer: source_epochs and source_train_size must be >= 1".into());
            }
            if let (Some(src), Some(dst)) = (t.source_task.input_dim(), self.task.input_dim()) {
                if src != dst {
                    return fail(format!(
                        "transfer.source_task: dimension {src} does not match target {dst}"
                    ));
                }
            }
        }
        Ok(())
    }
}
