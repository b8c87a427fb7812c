//! IDX binary format, the canonical MNIST file layout.
//!
//! Big-endian magic and dimension sizes, then raw unsigned bytes. Images
//! use magic 0x00000803 (three dimensions), labels 0x00000801 (one
//! dimension). Pixels are scaled to [0, 1] and flattened row-major.

use std::fs;
use std::path::Path;

use super::{DataError, Dataset, DatasetMeta};
use crate::nn::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_be_u32(bytes: &[u8], offset: usize, field: &str) -> Result<u32, DataError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| DataError::Format {
            field: field.to_string(),
            message: "file truncated".into(),
        })
}

/// Load an IDX image/label file pair into a dataset.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, DataError> {
    let image_bytes = fs::read(images_path)?;
    let label_bytes = fs::read(labels_path)?;

    let magic = read_be_u32(&image_bytes, 0, "images.magic")?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::Format {
            field: "images.magic".into(),
            message: format!("expected 0x{IMAGES_MAGIC:08x}, got 0x{magic:08x}"),
        });
    }
    let count = read_be_u32(&image_bytes, 4, "images.count")? as usize;
    let rows = read_be_u32(&image_bytes, 8, "images.rows")? as usize;
    let cols = read_be_u32(&image_bytes, 12, "images.cols")? as usize;
    let pixels = count * rows * cols;
    let body = &image_bytes[16.min(image_bytes.len())..];
    if body.len() != pixels {
        return Err(DataError::Format {
            field: "images.data".into(),
            message: format!("expected {pixels} pixel bytes, found {}", body.len()),
        });
    }

    let magic = read_be_u32(&label_bytes, 0, "labels.magic")?;
    if magic != LABELS_MAGIC {
        return Err(DataError::Format {
            field: "labels.magic".into(),
            message: format!("expected 0x{LABELS_MAGIC:08x}, got 0x{magic:08x}"),
        });
    }
    let label_count = read_be_u32(&label_bytes, 4, "labels.count")? as usize;
    let label_body = &label_bytes[8.min(label_bytes.len())..];
    if label_body.len() != label_count {
        return Err(DataError::Format {
            field: "labels.data".into(),
            message: format!("expected {label_count} label bytes, found {}", label_body.len()),
        });
    }
    if label_count != count {
        return Err(DataError::Format {
            field: "labels.count".into(),
            message: format!("{count} images but {label_count} labels"),
        });
    }

    let features = Matrix::from_vec(
        count,
        rows * cols,
        body.iter().map(|&b| f64::from(b) / 255.0).collect(),
    )
    .map_err(|e| DataError::Format {
        field: "images.data".into(),
        message: e.to_string(),
    })?;
    let labels: Vec<u32> = label_body.iter().map(|&b| u32::from(b)).collect();
    let class_count = labels.iter().max().map_or(1, |&m| m + 1);
    Dataset::new(
        features,
        labels,
        DatasetMeta {
            source: images_path.display().to_string(),
            generator_seed: None,
            class_count,
        },
    )
}

/// Write images (rows of `side * side` values in [0, 1]) as an IDX file.
pub fn write_idx_images(
    path: &Path,
    features: &Matrix,
    rows: usize,
    cols: usize,
) -> Result<(), DataError> {
    if rows * cols != features.cols() {
        return Err(DataError::Dimension(format!(
            "{}x{} images do not match {} feature columns",
            rows,
            cols,
            features.cols()
        )));
    }
    let mut bytes = Vec::with_capacity(16 + features.rows() * rows * cols);
    bytes.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(features.rows() as u32).to_be_bytes());
    bytes.extend_from_slice(&(rows as u32).to_be_bytes());
    bytes.extend_from_slice(&(cols as u32).to_be_bytes());
    for &v in features.data() {
        bytes.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Write labels as an IDX file.
pub fn write_idx_labels(path: &Path, labels: &[u32]) -> Result<(), DataError> {
    if let Some(&bad) = labels.iter().find(|&&l| l > 255) {
        return Err(DataError::Validation(format!("label {bad} does not fit a byte")));
    }
    let mut bytes = Vec::with_capacity(8 + labels.len());
    bytes.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    bytes.extend(labels.iter().map(|&l| l as u8));
    fs::write(path, bytes)?;
    Ok(())
}
