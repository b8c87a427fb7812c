//! Exact counting results for sign-constrained single-hidden-layer networks.
//!
//! Everything here is computed in arbitrary-precision integer/rational
//! arithmetic; floats appear only at output boundaries. The closed-form
//! probabilities ([`prob_representable_2d`], [`prob_representable_hd`]) are
//! cross-checked by an exhaustive enumeration oracle
//! ([`enumerate_representable`]) and a Monte Carlo estimator
//! ([`mc_representable`]) that never share the counting recursion.

mod counting;
mod enumerate;
mod mc;

pub use counting::{
    capacity_ratio, capacity_ratio_per_edge, prob_representable_2d, prob_representable_hd, q_count,
};
pub use enumerate::{enumerate_representable, ENUMERATION_GUARD};
pub use mc::{mc_representable, wilson_interval, McEstimate};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("{0}")]
    Domain(String),
    #[error("enumeration size {tuples} exceeds guard of {guard} tuples")]
    EnumerationTooLarge { tuples: u128, guard: u128 },
}

/// An exact probability: a reduced nonnegative rational in [0, 1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProb(BigRational);

impl ExactProb {
    pub fn new(value: BigRational) -> Result<Self, TheoryError> {
        if value.is_negative() || value > BigRational::one() {
            return Err(TheoryError::Domain(format!(
                "probability {value} outside [0, 1]"
            )));
        }
        Ok(ExactProb(value))
    }

    pub fn zero() -> Self {
        ExactProb(BigRational::zero())
    }

    /// Probability as `count / total` of nonnegative integers.
    pub fn from_count(count: BigInt, total: BigInt) -> Result<Self, TheoryError> {
        if total <= BigInt::zero() {
            return Err(TheoryError::Domain("total must be positive".into()));
        }
        Self::new(BigRational::new(count, total))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    /// Nearest-double rendering, for CSV output and plotting.
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

impl std::fmt::Display for ExactProb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl PartialOrd for ExactProb {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactProb {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale by 2^64 before the integer division so small ratios keep
    // their leading bits.
    let shift = BigInt::one() << 64u32;
    let scaled = r.numer() * &shift / r.denom();
    let approx = scaled.to_string().parse::<f64>().unwrap_or(f64::NAN);
    approx / 2f64.powi(64)
}

/// The space of per-unit sign patterns for inputs of dimension `dim`:
/// each hidden unit has `dim` input signs and one output sign, so there
/// are 2^(dim+1) patterns total of which 2^dim satisfy the XOR product
/// rule on the first two inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternSpace {
    dim: u32,
}

impl PatternSpace {
    pub fn new(dim: u32) -> Result<Self, TheoryError> {
        if dim < 2 {
            return Err(TheoryError::Domain(format!(
                "input dimension must be at least 2, got {dim}"
            )));
        }
        if dim > 100 {
            return Err(TheoryError::Domain(format!(
                "input dimension {dim} unreasonably large"
            )));
        }
        Ok(PatternSpace { dim })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Number of distinct per-unit sign patterns, 2^(dim+1).
    pub fn total_patterns(&self) -> u128 {
        1u128 << (self.dim + 1)
    }

    /// Number of XOR-compatible patterns, 2^dim.
    pub fn compatible_patterns(&self) -> u128 {
        1u128 << self.dim
    }

    /// Bit-encoded pattern test. Bit `i` holds the sign of input weight
    /// `i` (0 = plus, 1 = minus) and bit `dim` the output sign; the unit
    /// is compatible when the output sign is the negated product of the
    /// first two input signs, the convention of the working XOR
    /// constructions. Exactly half of all patterns qualify, so every
    /// counting result is identical under the opposite convention.
    pub fn is_compatible(&self, pattern: u64) -> bool {
        let out = (pattern >> self.dim) & 1;
        out == 1 ^ (pattern & 1) ^ ((pattern >> 1) & 1)
    }

    /// The (in1, in2, out) sign triplet of a pattern, packed into 3 bits.
    pub fn triplet_of(&self, pattern: u64) -> u8 {
        ((pattern & 1) | ((pattern >> 1) & 1) << 1 | ((pattern >> self.dim) & 1) << 2) as u8
    }
}

/// How to count "enough distinct XOR-compatible units" in a drawn tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// At least 3 distinct full (dim+1)-sign compatible patterns. This is
    /// the quantity the closed-form probabilities count.
    DistinctFullPatterns,
    /// At least 3 distinct (in1, in2, out) sign triplets satisfying the
    /// product rule. Two full patterns that differ only in irrelevant-
    /// dimension signs collapse to one triplet, so this criterion is
    /// never more probable than `DistinctFullPatterns`.
    DistinctTriplets,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::DistinctFullPatterns => "full",
            Criterion::DistinctTriplets => "triplet",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = TheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Criterion::DistinctFullPatterns),
            "triplet" => Ok(Criterion::DistinctTriplets),
            other => Err(TheoryError::Domain(format!(
                "unknown criterion {other:?}, expected \"full\" or \"triplet\""
            ))),
        }
    }
}

/// Discretized single-hidden-layer capacity description: weights take
/// values in {-level, ..., 0, ..., +level} and the layers have sizes
/// (inputs, hidden, outputs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacitySpec {
    pub level: u32,
    pub layer_sizes: (u32, u32, u32),
}

impl CapacitySpec {
    pub fn new(level: u32, layer_sizes: (u32, u32, u32)) -> Result<Self, TheoryError> {
        if level < 1 {
            return Err(TheoryError::Domain("discretization level must be >= 1".into()));
        }
        let (v0, v1, v2) = layer_sizes;
        if v0 < 1 || v1 < 1 || v2 < 1 {
            return Err(TheoryError::Domain("layer sizes must be >= 1".into()));
        }
        Ok(CapacitySpec { level, layer_sizes })
    }

    /// Edge count of the fully connected two-layer graph.
    pub fn edge_count(&self) -> u64 {
        let (v0, v1, v2) = self.layer_sizes;
        u64::from(v0) * u64::from(v1) + u64::from(v1) * u64::from(v2)
    }
}
