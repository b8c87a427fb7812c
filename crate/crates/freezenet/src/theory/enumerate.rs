//! Exhaustive enumeration oracle for the representability probabilities.
//!
//! Walks every tuple of per-unit sign patterns and counts the ones with
//! at least 3 distinct XOR-compatible members. Deliberately independent
//! of the closed-form recursion in `counting`.

use num::bigint::BigInt;
use rayon::prelude::*;

use super::{Criterion, ExactProb, PatternSpace, TheoryError};

/// Upper bound on the number of tuples a single enumeration may visit.
pub const ENUMERATION_GUARD: u128 = 100_000_000;

const REQUIRED_DISTINCT: usize = 3;

struct TupleCounter<'a> {
    space: &'a PatternSpace,
    criterion: Criterion,
    units: u32,
}

impl TupleCounter<'_> {
    /// Number of pattern tuples extending `prefix_state` at `depth` that
    /// end up with >= 3 distinct compatible members. `seen_full` tracks
    /// full patterns (one bit per pattern, chunked in u64 words) and
    /// `seen_triplets` the 8 possible (in1, in2, out) sign triplets.
    fn count_from(&self, depth: u32, seen_full: &mut [u64], seen_triplets: u8) -> u64 {
        if depth == self.units {
            let distinct = match self.criterion {
                Criterion::DistinctFullPatterns => {
                    seen_full.iter().map(|w| w.count_ones() as usize).sum()
                }
                Criterion::DistinctTriplets => seen_triplets.count_ones() as usize,
            };
            return u64::from(distinct >= REQUIRED_DISTINCT);
        }
        let mut total = 0u64;
        for pattern in 0..self.space.total_patterns() as u64 {
            if self.space.is_compatible(pattern) {
                let word = (pattern / 64) as usize;
                let bit = 1u64 << (pattern % 64);
                let had_full = seen_full[word] & bit != 0;
                seen_full[word] |= bit;
                let trip_bit = 1u8 << self.space.triplet_of(pattern);
                total += self.count_from(depth + 1, seen_full, seen_triplets | trip_bit);
                if !had_full {
                    seen_full[word] &= !bit;
                }
            } else {
                total += self.count_from(depth + 1, seen_full, seen_triplets);
            }
        }
        total
    }
}

/// Exact probability of drawing `units` sign patterns with at least 3
/// distinct XOR-compatible members, by visiting every tuple. Guarded to
/// at most [`ENUMERATION_GUARD`] tuples.
pub fn enumerate_representable(
    units: u32,
    dim: u32,
    criterion: Criterion,
) -> Result<ExactProb, TheoryError> {
    if units < 1 {
        return Err(TheoryError::Domain("unit count must be >= 1".into()));
    }
    let space = PatternSpace::new(dim)?;
    let tuples = space
        .total_patterns()
        .checked_pow(units)
        .ok_or(TheoryError::EnumerationTooLarge {
            tuples: u128::MAX,
            guard: ENUMERATION_GUARD,
        })?;
    if tuples > ENUMERATION_GUARD {
        return Err(TheoryError::EnumerationTooLarge {
            tuples,
            guard: ENUMERATION_GUARD,
        });
    }

    let counter = TupleCounter {
        space: &space,
        criterion,
        units,
    };
    let words = (space.total_patterns() as usize).div_ceil(64);
    // Split the search over the first unit's pattern so workers never
    // share mutable state.
    let favorable: u64 = (0..space.total_patterns() as u64)
        .into_par_iter()
        .map(|first| {
            let mut seen_full = vec![0u64; words];
            let mut seen_triplets = 0u8;
            if space.is_compatible(first) {
                seen_full[(first / 64) as usize] |= 1 << (first % 64);
                seen_triplets |= 1 << space.triplet_of(first);
            }
            counter.count_from(1, &mut seen_full, seen_triplets)
        })
        .sum();

    let total = BigInt::from(space.total_patterns()).pow(units);
    ExactProb::from_count(BigInt::from(favorable), total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::prob_representable_hd;

    #[test]
    fn three_units_2d_both_criteria() {
        let full = enumerate_representable(3, 2, Criterion::DistinctFullPatterns).unwrap();
        let trip = enumerate_representable(3, 2, Criterion::DistinctTriplets).unwrap();
        assert_eq!(full.to_string(), "3/64");
        assert_eq!(trip, full);
    }

    #[test]
    fn matches_formula_at_3d() {
        let oracle = enumerate_representable(3, 3, Criterion::DistinctFullPatterns).unwrap();
        assert_eq!(oracle, prob_representable_hd(3, 3).unwrap());
        let oracle4 = enumerate_representable(4, 3, Criterion::DistinctFullPatterns).unwrap();
        assert_eq!(oracle4, prob_representable_hd(4, 3).unwrap());
    }

    #[test]
    fn triplets_never_exceed_full_patterns() {
        for (units, dim) in [(3u32, 3u32), (4, 3), (3, 4)] {
            let full = enumerate_representable(units, dim, Criterion::DistinctFullPatterns).unwrap();
            let trip = enumerate_representable(units, dim, Criterion::DistinctTriplets).unwrap();
            assert!(trip <= full, "units={units} dim={dim}");
        }
    }

    #[test]
    fn triplet_criterion_collapses_irrelevant_dims() {
        // A triplet count ignores the extra dimensions, so the triplet
        // probability at any dim equals the 2-D probability.
        let trip3 = enumerate_representable(3, 3, Criterion::DistinctTriplets).unwrap();
        assert_eq!(trip3.to_string(), "3/64");
    }

    #[test]
    fn guard_rejects_oversized_enumerations() {
        match enumerate_representable(30, 5, Criterion::DistinctFullPatterns) {
            Err(TheoryError::EnumerationTooLarge { .. }) => {}
            other => panic!("expected size guard, got {other:?}"),
        }
    }

    #[test]
    fn below_three_units_is_zero() {
        for dim in 2..=4 {
            let p = enumerate_representable(2, dim, Criterion::DistinctFullPatterns).unwrap();
            assert_eq!(p, ExactProb::zero());
        }
    }
}
