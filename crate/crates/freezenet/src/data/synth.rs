//! Synthetic two-class grayscale image task.
//!
//! A stand-in for small image-classification subsets when no real IDX
//! files are at hand: each class has a fixed prototype image (a sum of
//! smooth bumps determined by the task seed), and samples are intensity-
//! jittered, noisy renderings of their class prototype. Two specs with
//! the same task seed describe related tasks (same prototypes, possibly
//! different noise), which is what the transfer experiments need.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, DatasetMeta};
use crate::nn::Matrix;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthImageSpec {
    /// Images are `side x side` pixels.
    pub side: usize,
    /// Standard deviation of the per-pixel Gaussian noise.
    pub noise: f64,
    /// Fixes the class prototypes.
    pub task_seed: u64,
}

impl Default for SynthImageSpec {
    fn default() -> Self {
        SynthImageSpec {
            side: 16,
            noise: 0.4,
            task_seed: 0,
        }
    }
}

fn prototype(spec: &SynthImageSpec, class: u32) -> Vec<f64> {
    let side = spec.side;
    let mut rng =
        ChaCha8Rng::seed_from_u64(seeds::derive(spec.task_seed, "prototype", u64::from(class)));
    let mut image = vec![0.0f64; side * side];
    let bumps = 5;
    for _ in 0..bumps {
        let cx: f64 = rng.random_range(0.0..side as f64);
        let cy: f64 = rng.random_range(0.0..side as f64);
        let radius: f64 = rng.random_range(side as f64 / 8.0..side as f64 / 3.0);
        let amplitude: f64 = rng.random_range(0.5..1.0);
        for y in 0..side {
            for x in 0..side {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                image[y * side + x] +=
                    amplitude * (-(dx * dx + dy * dy) / (2.0 * radius * radius)).exp();
            }
        }
    }
    let max = image.iter().cloned().fold(f64::MIN, f64::max).max(1e-9);
    for v in &mut image {
        *v /= max;
    }
    image
}

/// Generate `n` samples of the two-class image task. Labels alternate
/// deterministically so every draw is exactly balanced up to one sample.
pub fn gen_synth_images(spec: &SynthImageSpec, n: usize, seed: u64) -> Result<Dataset, DataError> {
    if spec.side < 2 {
        return Err(DataError::Dimension("image side must be >= 2".into()));
    }
    if n == 0 {
        return Err(DataError::Size("sample count must be >= 1".into()));
    }
    if !(spec.noise >= 0.0) {
        return Err(DataError::Validation(format!("bad noise level {}", spec.noise)));
    }
    let prototypes = [prototype(spec, 0), prototype(spec, 1)];
    let dim = spec.side * spec.side;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, "synth-images", 0));
    let noise = Normal::new(0.0, spec.noise.max(1e-12)).unwrap();
    let mut features = Matrix::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for r in 0..n {
        let label = (r % 2) as u32;
        let intensity: f64 = rng.random_range(0.6..1.0);
        let proto = &prototypes[label as usize];
        let row = features.row_mut(r);
        for (v, &p) in row.iter_mut().zip(proto) {
            let noisy = intensity * p + if spec.noise > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            *v = noisy.clamp(0.0, 1.0);
        }
        labels.push(label);
    }
    Dataset::new(
        features,
        labels,
        DatasetMeta {
            source: format!("synth-images-{0}x{0}", spec.side),
            generator_seed: Some(seed),
            class_count: 2,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let spec = SynthImageSpec::default();
        let a = gen_synth_images(&spec, 50, 3).unwrap();
        let b = gen_synth_images(&spec, 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.features().data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn same_task_seed_shares_prototypes() {
        let lo_noise = SynthImageSpec {
            noise: 0.0,
            ..SynthImageSpec::default()
        };
        let a = gen_synth_images(&lo_noise, 2, 1).unwrap();
        let b = gen_synth_images(&lo_noise, 2, 2).unwrap();
        // With zero noise only the intensity jitter differs, so pixel
        // ratios within a class match across seeds.
        let ra = a.features().row(0);
        let rb = b.features().row(0);
        let (ia, ib) = (ra.iter().cloned().fold(0.0, f64::max), rb.iter().cloned().fold(0.0, f64::max));
        for (&va, &vb) in ra.iter().zip(rb) {
            assert!((va / ia - vb / ib).abs() < 1e-9);
        }
    }

    #[test]
    fn classes_are_balanced() {
        let data = gen_synth_images(&SynthImageSpec::default(), 101, 9).unwrap();
        let ones = data.labels().iter().filter(|&&l| l == 1).count();
        assert_eq!(ones, 50);
    }

    #[test]
    fn different_task_seeds_differ() {
        let a = gen_synth_images(&SynthImageSpec::default(), 4, 1).unwrap();
        let other = SynthImageSpec {
            task_seed: 99,
            ..SynthImageSpec::default()
        };
        let b = gen_synth_images(&other, 4, 1).unwrap();
        assert_ne!(a.features(), b.features());
    }
}
