//! Data generation, ingestion and split planning.

mod cache;
mod idx;
mod splits;
mod synth;
mod xor;

pub use cache::{load_cache, save_cache};
pub use idx::{load_idx, write_idx_images, write_idx_labels};
pub use splits::{make_splits, SplitPlan, Splits};
pub use synth::{gen_synth_images, SynthImageSpec};
pub use xor::gen_xor;

use thiserror::Error;

use crate::nn::Matrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("format error in {field}: {message}")]
    Format { field: String, message: String },
    #[error("size error: {0}")]
    Size(String),
    #[error("invalid dataset: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Where a dataset came from, for logging and provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetMeta {
    pub source: String,
    pub generator_seed: Option<u64>,
    pub class_count: u32,
}

/// A feature matrix with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<u32>,
    meta: DatasetMeta,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u32>, meta: DatasetMeta) -> Result<Self, DataError> {
        if features.rows() == 0 {
            return Err(DataError::Validation("dataset needs at least one sample".into()));
        }
        if features.rows() != labels.len() {
            return Err(DataError::Validation(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= meta.class_count) {
            return Err(DataError::Validation(format!(
                "label {bad} outside [0, {})",
                meta.class_count
            )));
        }
        if features.data().iter().any(|v| v.is_nan()) {
            return Err(DataError::Validation("features contain NaN".into()));
        }
        Ok(Dataset {
            features,
            labels,
            meta,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Rows and labels at the given dataset indices, in order.
    pub fn subset(&self, indices: &[usize]) -> (Matrix, Vec<u32>) {
        (
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}
