//! Closed-form counting of XOR-representable sign configurations.

use std::collections::HashMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use super::{ExactProb, PatternSpace, TheoryError};

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn q_count_memo(
    appearing: u32,
    tracked: u32,
    other: u32,
    draws: u32,
    memo: &mut HashMap<(u32, u32), BigInt>,
) -> BigInt {
    if let Some(v) = memo.get(&(appearing, tracked)) {
        return v.clone();
    }
    let value = if appearing == 0 {
        BigInt::from(other).pow(draws)
    } else {
        let mut inner = BigInt::from(other + appearing).pow(draws);
        for fewer in 0..appearing {
            inner -= q_count_memo(fewer, appearing, other, draws, memo);
        }
        inner * binomial(tracked, appearing)
    };
    memo.insert((appearing, tracked), value.clone());
    value
}

/// Number of length-`draws` tuples, drawn with replacement from
/// `tracked + other` options, in which exactly `appearing` of the
/// `tracked` options occur at least once.
pub fn q_count(appearing: u32, tracked: u32, other: u32, draws: u32) -> Result<BigInt, TheoryError> {
    if appearing > tracked {
        return Err(TheoryError::Domain(format!(
            "cannot have {appearing} distinct members out of {tracked}"
        )));
    }
    if draws < 1 {
        return Err(TheoryError::Domain("draw count must be >= 1".into()));
    }
    let mut memo = HashMap::new();
    Ok(q_count_memo(appearing, tracked, other, draws, &mut memo))
}

fn prob_from_sizes(units: u32, compatible: &BigInt, total: &BigInt) -> ExactProb {
    // The tracked and untracked option counts are equal here (half of all
    // sign patterns are XOR-compatible), and both fit in u32 for every
    // dimension the guard admits.
    let tracked = u32::try_from(compatible).expect("compatible pattern count fits u32");
    let other = u32::try_from(total - compatible).expect("pattern count fits u32");
    let mut short = BigInt::zero();
    let mut memo = HashMap::new();
    for appearing in 0..3u32 {
        short += q_count_memo(appearing, tracked, other, units, &mut memo);
    }
    let total_tuples = total.pow(units);
    ExactProb::from_count(&total_tuples - short, total_tuples)
        .expect("counted probability is always in [0, 1]")
}

/// Exact probability that `units` hidden units with i.i.d. Bernoulli(0.5)
/// weight signs contain at least 3 distinct XOR-compatible sign patterns,
/// for plain 2-input XOR.
pub fn prob_representable_2d(units: u32) -> Result<ExactProb, TheoryError> {
    if units < 1 {
        return Err(TheoryError::Domain("unit count must be >= 1".into()));
    }
    Ok(prob_from_sizes(units, &BigInt::from(4), &BigInt::from(8)))
}

/// Exact probability that `units` hidden units contain at least 3 distinct
/// XOR-compatible full sign patterns when the input has `dim` dimensions
/// of which only the first two are task-relevant.
pub fn prob_representable_hd(units: u32, dim: u32) -> Result<ExactProb, TheoryError> {
    if units < 1 {
        return Err(TheoryError::Domain("unit count must be >= 1".into()));
    }
    let space = PatternSpace::new(dim)?;
    if dim > 30 {
        return Err(TheoryError::Domain(format!(
            "dimension {dim} exceeds supported pattern-space width"
        )));
    }
    Ok(prob_from_sizes(
        units,
        &BigInt::from(space.compatible_patterns()),
        &BigInt::from(space.total_patterns()),
    ))
}

/// Per-edge count ratio of unconstrained to sign-frozen discrete weight
/// values, (2q+1)/(q+1) for discretization level q.
pub fn capacity_ratio_per_edge(level: u32) -> BigRational {
    BigRational::new(BigInt::from(2 * level + 1), BigInt::from(level + 1))
}

/// Count ratio of unconstrained to sign-frozen discrete weight patterns,
/// ((2q+1)/(q+1))^E for discretization level q and edge count E.
pub fn capacity_ratio(spec: &super::CapacitySpec) -> BigRational {
    let base = capacity_ratio_per_edge(spec.level);
    let edges = spec.edge_count();
    let mut acc = BigRational::one();
    let mut pow = base;
    let mut remaining = edges;
    while remaining > 0 {
        if remaining & 1 == 1 {
            acc *= pow.clone();
        }
        pow = pow.clone() * pow;
        remaining >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::CapacitySpec;

    #[test]
    fn q_count_base_case_is_power() {
        // No tracked member appears: other^draws.
        assert_eq!(q_count(0, 4, 4, 2).unwrap(), BigInt::from(16));
        assert_eq!(q_count(0, 4, 4, 1).unwrap(), BigInt::from(4));
    }

    #[test]
    fn q_count_single_member() {
        // 4 * (5^3 - 4^3) = 244, checked by brute force over all 8^3
        // tuples in `enumerate` tests as well.
        assert_eq!(q_count(1, 4, 4, 3).unwrap(), BigInt::from(244));
    }

    #[test]
    fn q_count_rejects_bad_domain() {
        assert!(q_count(5, 4, 4, 3).is_err());
        assert!(q_count(0, 4, 4, 0).is_err());
    }

    #[test]
    fn q_count_partitions_all_tuples() {
        // Summing over the number of appearing members recovers
        // (tracked + other)^draws.
        for (tracked, other, draws) in [(4u32, 4u32, 3u32), (3, 5, 4), (6, 2, 5)] {
            let mut sum = BigInt::zero();
            for appearing in 0..=tracked {
                sum += q_count(appearing, tracked, other, draws).unwrap();
            }
            assert_eq!(sum, BigInt::from(tracked + other).pow(draws));
        }
    }

    #[test]
    fn two_d_small_counts() {
        assert_eq!(prob_representable_2d(1).unwrap(), ExactProb::zero());
        assert_eq!(prob_representable_2d(2).unwrap(), ExactProb::zero());
        let p3 = prob_representable_2d(3).unwrap();
        assert_eq!(p3.numer(), &BigInt::from(3));
        assert_eq!(p3.denom(), &BigInt::from(64));
    }

    #[test]
    fn two_d_fifteen_units_in_expected_band() {
        let p = prob_representable_2d(15).unwrap().to_f64();
        assert!(p > 0.92 && p < 0.94, "got {p}");
    }

    #[test]
    fn hd_specializes_to_2d() {
        for n in 1..=20 {
            assert_eq!(
                prob_representable_hd(n, 2).unwrap(),
                prob_representable_2d(n).unwrap()
            );
        }
    }

    #[test]
    fn hd_zero_below_three_units() {
        for d in 2..=8 {
            assert_eq!(prob_representable_hd(1, d).unwrap(), ExactProb::zero());
            assert_eq!(prob_representable_hd(2, d).unwrap(), ExactProb::zero());
        }
    }

    #[test]
    fn hd_monotone_in_units() {
        for d in [2u32, 3, 5] {
            let mut prev = ExactProb::zero();
            for n in 1..=25 {
                let p = prob_representable_hd(n, d).unwrap();
                assert!(p >= prev, "not monotone at n={n} d={d}");
                prev = p;
            }
        }
    }

    #[test]
    fn hd_fifteen_units_exceeds_99_percent() {
        let p = prob_representable_hd(15, 5).unwrap();
        let threshold = BigRational::new(BigInt::from(99), BigInt::from(100));
        assert!(p.as_rational() > &threshold);
    }

    #[test]
    fn hd_rejects_low_dimension() {
        assert!(prob_representable_hd(5, 1).is_err());
        assert!(prob_representable_hd(0, 3).is_err());
    }

    #[test]
    fn two_d_matches_term_expansion() {
        // 1 - (1/2)^n - 4(5^n-4^n)/8^n - 6(6^n - 2(5^n-4^n) - 4^n)/8^n
        for n in 3..=12u32 {
            let total = BigInt::from(8).pow(n);
            let t0 = BigInt::from(4).pow(n);
            let t1 = BigInt::from(4) * (BigInt::from(5).pow(n) - BigInt::from(4).pow(n));
            let t2 = BigInt::from(6)
                * (BigInt::from(6).pow(n)
                    - BigInt::from(2) * (BigInt::from(5).pow(n) - BigInt::from(4).pow(n))
                    - BigInt::from(4).pow(n));
            let expect = ExactProb::from_count(&total - t0 - t1 - t2, total).unwrap();
            assert_eq!(prob_representable_2d(n).unwrap(), expect);
        }
    }

    #[test]
    fn capacity_ratio_simple_cases() {
        // Single edge at level 1: 3/2.
        assert_eq!(
            capacity_ratio_per_edge(1),
            BigRational::new(BigInt::from(3), BigInt::from(2))
        );
        // Smallest network has two edges: (3/2)^2.
        let spec = CapacitySpec::new(1, (1, 1, 1)).unwrap();
        assert_eq!(spec.edge_count(), 2);
        assert_eq!(
            capacity_ratio(&spec),
            BigRational::new(BigInt::from(9), BigInt::from(4))
        );
    }

    #[test]
    fn capacity_ratio_exponent_arithmetic() {
        // Layers (2,1,1) at level 1: edges = 2*1 + 1*1 = 3, ratio (3/2)^3.
        let spec = CapacitySpec::new(1, (2, 1, 1)).unwrap();
        let r = capacity_ratio(&spec);
        assert_eq!(r, BigRational::new(BigInt::from(27), BigInt::from(8)));
    }

    #[test]
    fn capacity_ratio_exceeds_one() {
        for q in 1..=5 {
            for v1 in 1..=4 {
                let spec = CapacitySpec::new(q, (3, v1, 2)).unwrap();
                assert!(capacity_ratio(&spec) > BigRational::one());
            }
        }
    }
}
