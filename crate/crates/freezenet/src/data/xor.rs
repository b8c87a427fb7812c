//! The XOR-dD synthetic task.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{DataError, Dataset, DatasetMeta};
use crate::nn::Matrix;

/// Generate an XOR task in `dim` dimensions: the first two features are
/// standard normal and carry the label (1 when exactly one of them is
/// positive), the remaining `dim - 2` features are N(1, 1) noise.
pub fn gen_xor(n: usize, dim: usize, seed: u64) -> Result<Dataset, DataError> {
    if dim < 2 {
        return Err(DataError::Dimension(format!(
            "XOR needs at least 2 dimensions, got {dim}"
        )));
    }
    if n == 0 {
        return Err(DataError::Size("sample count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let standard = Normal::new(0.0, 1.0).unwrap();
    let noise = Normal::new(1.0, 1.0).unwrap();
    let mut features = Matrix::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for r in 0..n {
        let row = features.row_mut(r);
        row[0] = standard.sample(&mut rng);
        row[1] = standard.sample(&mut rng);
        for v in row.iter_mut().skip(2) {
            *v = noise.sample(&mut rng);
        }
        labels.push(u32::from((row[0] > 0.0) != (row[1] > 0.0)));
    }
    Dataset::new(
        features,
        labels,
        DatasetMeta {
            source: format!("xor-{dim}d"),
            generator_seed: Some(seed),
            class_count: 2,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_sign_rule() {
        let data = gen_xor(500, 5, 42).unwrap();
        for r in 0..data.len() {
            let row = data.features().row(r);
            let expected = u32::from((row[0] > 0.0) != (row[1] > 0.0));
            assert_eq!(data.labels()[r], expected, "row {r}");
        }
    }

    #[test]
    fn sign_rule_specific_points() {
        // A (+,-) pair is labeled 1, a (-,-) pair 0; reconstructed from
        // generated rows so the assertion exercises the generator itself.
        let data = gen_xor(2000, 3, 7).unwrap();
        let mut saw_mixed = false;
        let mut saw_same = false;
        for r in 0..data.len() {
            let row = data.features().row(r);
            if row[0] > 0.0 && row[1] < 0.0 {
                assert_eq!(data.labels()[r], 1);
                saw_mixed = true;
            }
            if row[0] < 0.0 && row[1] < 0.0 {
                assert_eq!(data.labels()[r], 0);
                saw_same = true;
            }
        }
        assert!(saw_mixed && saw_same);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(gen_xor(100, 5, 9).unwrap(), gen_xor(100, 5, 9).unwrap());
        assert_ne!(gen_xor(100, 5, 9).unwrap(), gen_xor(100, 5, 10).unwrap());
    }

    #[test]
    fn rejects_thin_dimensions() {
        assert!(gen_xor(10, 1, 0).is_err());
        assert!(gen_xor(0, 5, 0).is_err());
    }

    /// Central-limit bounds at roughly three sigma over 10k samples.
    #[test]
    fn label_balance_and_noise_mean() {
        let data = gen_xor(10_000, 5, 123).unwrap();
        let positives = data.labels().iter().filter(|&&l| l == 1).count() as f64;
        let balance = positives / 10_000.0;
        assert!((0.47..=0.53).contains(&balance), "balance {balance}");
        for dim in 2..5 {
            let mean: f64 = (0..data.len())
                .map(|r| data.features().get(r, dim))
                .sum::<f64>()
                / 10_000.0;
            assert!((0.9..=1.1).contains(&mean), "dim {dim} mean {mean}");
        }
    }
}
