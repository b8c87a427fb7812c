//! Monte Carlo estimation of the representability probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Criterion, PatternSpace, TheoryError};

/// Trials are consumed in fixed-size chunks with per-chunk derived seeds,
/// so the estimate does not depend on how many workers ran them.
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    assert!(
        confidence > 0.0 && confidence < 1.0,
        "confidence must be in (0, 1)"
    );
    let normal = Normal::new(0.0, 1.0).unwrap();
    let z = normal.inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let radius = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((centre - radius) / denom).max(0.0),
        ((centre + radius) / denom).min(1.0),
    )
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn run_chunk(
    space: &PatternSpace,
    units: u32,
    criterion: Criterion,
    trials: u64,
    seed: u64,
) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = space.total_patterns() as u64;
    let words = (space.total_patterns() as usize).div_ceil(64);
    let mut seen_full = vec![0u64; words];
    let mut successes = 0u64;
    for _ in 0..trials {
        seen_full.fill(0);
        let mut seen_triplets = 0u8;
        for _ in 0..units {
            let pattern = rng.random_range(0..total);
            if space.is_compatible(pattern) {
                seen_full[(pattern / 64) as usize] |= 1 << (pattern % 64);
                seen_triplets |= 1 << space.triplet_of(pattern);
            }
        }
        let distinct: u32 = match criterion {
            Criterion::DistinctFullPatterns => seen_full.iter().map(|w| w.count_ones()).sum(),
            Criterion::DistinctTriplets => seen_triplets.count_ones(),
        };
        if distinct >= 3 {
            successes += 1;
        }
    }
    successes
}

/// Estimate the probability of drawing at least 3 distinct XOR-compatible
/// sign patterns among `units` units by sampling sign tuples uniformly.
pub fn mc_representable(
    units: u32,
    dim: u32,
    trials: u64,
    seed: u64,
    criterion: Criterion,
    confidence: f64,
) -> Result<McEstimate, TheoryError> {
    if trials < 1 {
        return Err(TheoryError::Domain("trial count must be >= 1".into()));
    }
    let space = PatternSpace::new(dim)?;
    let chunks: Vec<(u64, u64)> = (0..trials.div_ceil(CHUNK))
        .map(|i| {
            let len = CHUNK.min(trials - i * CHUNK);
            (splitmix64(seed ^ i.wrapping_mul(0xa076_1d64_78bd_642f)), len)
        })
        .collect();
    let successes: u64 = chunks
        .par_iter()
        .map(|&(chunk_seed, len)| run_chunk(&space, units, criterion, len, chunk_seed))
        .sum();
    let (ci_low, ci_high) = wilson_interval(successes, trials, confidence);
    Ok(McEstimate {
        successes,
        trials,
        estimate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        confidence,
    })
}
