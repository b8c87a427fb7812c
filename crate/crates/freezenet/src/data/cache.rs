//! Binary dataset cache.
//!
//! Layout: magic `PFDS`, then little-endian u32 version, n, d and
//! class_count, then n*d little-endian f64 features and n u32 labels.

use std::fs;
use std::path::Path;

use super::{DataError, Dataset, DatasetMeta};
use crate::nn::Matrix;

const MAGIC: &[u8; 4] = b"PFDS";
const VERSION: u32 = 1;

pub fn save_cache(data: &Dataset, path: &Path) -> Result<(), DataError> {
    let n = data.len();
    let d = data.dim();
    let mut bytes = Vec::with_capacity(20 + n * d * 8 + n * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&(d as u32).to_le_bytes());
    bytes.extend_from_slice(&data.meta().class_count.to_le_bytes());
    for &v in data.features().data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for &l in data.labels() {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn take_u32(bytes: &[u8], offset: &mut usize, field: &str) -> Result<u32, DataError> {
    let slice = bytes
        .get(*offset..*offset + 4)
        .ok_or_else(|| DataError::Format {
            field: field.to_string(),
            message: "file truncated".into(),
        })?;
    *offset += 4;
    Ok(u32::from_le_bytes([slice[0], slice[1], slice[2], slice[3]]))
}

pub fn load_cache(path: &Path) -> Result<Dataset, DataError> {
    let bytes = fs::read(path)?;
    if bytes.get(..4) != Some(MAGIC.as_slice()) {
        return Err(DataError::Format {
            field: "magic".into(),
            message: "not a PFDS cache file".into(),
        });
    }
    let mut offset = 4;
    let version = take_u32(&bytes, &mut offset, "version")?;
    if version != VERSION {
        return Err(DataError::Format {
            field: "version".into(),
            message: format!("unsupported version {version}"),
        });
    }
    let n = take_u32(&bytes, &mut offset, "n")? as usize;
    let d = take_u32(&bytes, &mut offset, "d")? as usize;
    let class_count = take_u32(&bytes, &mut offset, "class_count")?;
    let feature_bytes = n * d * 8;
    let expected = offset + feature_bytes + n * 4;
    if bytes.len() != expected {
        return Err(DataError::Format {
            field: "body".into(),
            message: format!("expected {expected} bytes, found {}", bytes.len()),
        });
    }
    let mut features = Vec::with_capacity(n * d);
    for chunk in bytes[offset..offset + feature_bytes].chunks_exact(8) {
        features.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    offset += feature_bytes;
    let mut labels = Vec::with_capacity(n);
    for chunk in bytes[offset..].chunks_exact(4) {
        labels.push(u32::from_le_bytes(chunk.try_into().unwrap()));
    }
    Dataset::new(
        Matrix::from_vec(n, d, features).map_err(|e| DataError::Format {
            field: "features".into(),
            message: e.to_string(),
        })?,
        labels,
        DatasetMeta {
            source: path.display().to_string(),
            generator_seed: None,
            class_count,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_xor;
    use tempfile::tempdir;

    #[test]
    fn cache_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.pfds");
        let data = gen_xor(64, 5, 17).unwrap();
        save_cache(&data, &path).unwrap();
        let loaded = load_cache(&path).unwrap();
        assert_eq!(loaded.features(), data.features());
        assert_eq!(loaded.labels(), data.labels());
        assert_eq!(loaded.meta().class_count, 2);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("junk.pfds");
        fs::write(&path, b"not a cache").unwrap();
        let err = load_cache(&path).unwrap_err();
        assert!(err.to_string().contains("magic"));
    }
}
