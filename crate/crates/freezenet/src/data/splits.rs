//! Train/validation splits with deterministic, condition-independent
//! batch ordering.
//!
//! Identical plan and seeds give identical splits and identical
//! per-epoch batch orderings, whatever the experimental condition; this
//! is the controlled-experiment contract everything else relies on.
//! Train subsets are nested: the 60-sample set is a prefix of the
//! 72-sample set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_sizes: Vec<usize>,
    pub validation_size: usize,
    pub sample_seed: u64,
    pub batch_seed: u64,
    pub batch_size: usize,
}

#[derive(Debug, Clone)]
pub struct Splits {
    validation: Vec<usize>,
    train_pool: Vec<usize>,
    plan: SplitPlan,
}

pub fn make_splits(data: &Dataset, plan: &SplitPlan) -> Result<Splits, DataError> {
    if plan.batch_size == 0 {
        return Err(DataError::Size("batch size must be >= 1".into()));
    }
    let largest = plan.train_sizes.iter().copied().max().unwrap_or(0);
    if largest == 0 {
        return Err(DataError::Size("need at least one nonzero train size".into()));
    }
    if plan.validation_size + largest > data.len() {
        return Err(DataError::Size(format!(
            "validation {} + train {} exceed {} samples",
            plan.validation_size,
            largest,
            data.len()
        )));
    }
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(plan.sample_seed, "split", 0));
    indices.shuffle(&mut rng);
    let validation = indices[..plan.validation_size].to_vec();
    let train_pool = indices[plan.validation_size..plan.validation_size + largest].to_vec();
    Ok(Splits {
        validation,
        train_pool,
        plan: plan.clone(),
    })
}

impl Splits {
    pub fn validation(&self) -> &[usize] {
        &self.validation
    }

    /// The first `size` pooled indices; subsets nest across sizes.
    pub fn train(&self, size: usize) -> Result<&[usize], DataError> {
        if size == 0 || size > self.train_pool.len() {
            return Err(DataError::Size(format!(
                "train size {size} outside pool of {}",
                self.train_pool.len()
            )));
        }
        Ok(&self.train_pool[..size])
    }

    /// Dataset-index batches for one epoch of a given train size. The
    /// ordering depends only on the batch seed, epoch and size.
    pub fn batch_order(&self, train_size: usize, epoch: usize) -> Result<Vec<Vec<usize>>, DataError> {
        let train = self.train(train_size)?;
        let mut order: Vec<usize> = (0..train_size).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(
            self.plan.batch_seed,
            "batch",
            (epoch as u64) << 32 | train_size as u64,
        ));
        order.shuffle(&mut rng);
        Ok(order
            .chunks(self.plan.batch_size)
            .map(|chunk| chunk.iter().map(|&i| train[i]).collect())
            .collect())
    }

    pub fn plan(&self) -> &SplitPlan {
        &self.plan
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_xor;

    fn plan() -> SplitPlan {
        SplitPlan {
            train_sizes: vec![60, 72, 100],
            validation_size: 200,
            sample_seed: 5,
            batch_seed: 6,
            batch_size: 32,
        }
    }

    #[test]
    fn identical_plans_give_identical_batches() {
        let data = gen_xor(400, 5, 1).unwrap();
        let a = make_splits(&data, &plan()).unwrap();
        let b = make_splits(&data, &plan()).unwrap();
        assert_eq!(a.validation(), b.validation());
        for epoch in 0..5 {
            assert_eq!(
                a.batch_order(72, epoch).unwrap(),
                b.batch_order(72, epoch).unwrap()
            );
        }
    }

    #[test]
    fn train_subsets_nest() {
        let data = gen_xor(400, 5, 1).unwrap();
        let s = make_splits(&data, &plan()).unwrap();
        let t60 = s.train(60).unwrap();
        let t72 = s.train(72).unwrap();
        assert_eq!(&t72[..60], t60);
    }

    #[test]
    fn validation_disjoint_from_training() {
        let data = gen_xor(400, 5, 1).unwrap();
        let s = make_splits(&data, &plan()).unwrap();
        let val: std::collections::HashSet<_> = s.validation().iter().collect();
        for &idx in s.train(100).unwrap() {
            assert!(!val.contains(&idx));
        }
    }

    #[test]
    fn batches_cover_the_subset_exactly_once() {
        let data = gen_xor(400, 5, 1).unwrap();
        let s = make_splits(&data, &plan()).unwrap();
        let batches = s.batch_order(72, 3).unwrap();
        let mut seen: Vec<usize> = batches.into_iter().flatten().collect();
        seen.sort_unstable();
        let mut expected: Vec<usize> = s.train(72).unwrap().to_vec();
        expected.sort_unstable();
        assert_eq!(seen, expected);
    }

    #[test]
    fn rejects_oversubscription() {
        let data = gen_xor(100, 5, 1).unwrap();
        assert!(make_splits(&data, &plan()).is_err());
    }
}
