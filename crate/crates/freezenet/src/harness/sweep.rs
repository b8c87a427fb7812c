//! Cross-product sweeps and percentile aggregation.

use rayon::prelude::*;

use super::{
    epochs_to_threshold, final_error, run_trial, Condition, ExperimentConfig, HarnessError,
    SeedTuple, TransferSource, TrialHistory, TrialSpec,
};
use crate::data::{make_splits, SplitPlan};

/// Percentile by linear interpolation between order statistics, the
/// common "type 7" definition. `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let low = pos.floor() as usize;
    let high = pos.ceil() as usize;
    let frac = pos - low as f64;
    sorted[low] + (sorted[high] - sorted[low]) * frac
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("NaN in aggregate"));
    values
}

/// One aggregate row per (condition, train size, hidden size, metric).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub condition: Condition,
    pub train_size: usize,
    pub hidden_size: usize,
    /// "final_error" or "epochs_to_<threshold>".
    pub metric: String,
    pub median: Option<f64>,
    pub p25: Option<f64>,
    pub p75: Option<f64>,
    /// Fraction of trials reaching the metric's threshold (the primary
    /// threshold for the final_error row).
    pub success_rate: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub histories: Vec<TrialHistory>,
    pub rows: Vec<AggregateRow>,
}

impl SweepResult {
    /// Median final validation error for one cell, if present.
    pub fn median_final_error(
        &self,
        condition: Condition,
        train_size: usize,
        hidden_size: usize,
    ) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.condition == condition
                    && r.train_size == train_size
                    && r.hidden_size == hidden_size
                    && r.metric == "final_error"
            })
            .and_then(|r| r.median)
    }

    /// Success rate at the primary threshold for one cell.
    pub fn success_rate(
        &self,
        condition: Condition,
        train_size: usize,
        hidden_size: usize,
    ) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.condition == condition
                    && r.train_size == train_size
                    && r.hidden_size == hidden_size
                    && r.metric == "final_error"
            })
            .map(|r| r.success_rate)
    }

    /// Median epochs-to-threshold among successful trials for one cell.
    pub fn median_epochs_to(
        &self,
        condition: Condition,
        train_size: usize,
        hidden_size: usize,
        threshold: f64,
    ) -> Option<f64> {
        let metric = format!("epochs_to_{threshold}");
        self.rows
            .iter()
            .find(|r| {
                r.condition == condition
                    && r.train_size == train_size
                    && r.hidden_size == hidden_size
                    && r.metric == metric
            })
            .and_then(|r| r.median)
    }
}

/// Recompute aggregate rows from raw histories. Diverged trials count
/// as failures for success rates and are excluded from epoch medians.
pub fn aggregate(histories: &[TrialHistory], thresholds: &[f64]) -> Vec<AggregateRow> {
    let mut cells: Vec<(Condition, usize, usize)> = histories
        .iter()
        .map(|h| (h.condition, h.train_size, h.hidden_size))
        .collect();
    cells.sort_by_key(|&(c, s, h)| (c.name(), s, h));
    cells.dedup();

    let primary = thresholds.first().copied().unwrap_or(0.8);
    let mut rows = Vec::new();
    for (condition, train_size, hidden_size) in cells {
        let group: Vec<&TrialHistory> = histories
            .iter()
            .filter(|h| {
                h.condition == condition
                    && h.train_size == train_size
                    && h.hidden_size == hidden_size
            })
            .collect();
        let n_trials = group.len();

        let errors = sorted(group.iter().map(|h| final_error(h)).collect());
        let success = |thr: f64| {
            group
                .iter()
                .filter(|h| !h.diverged && epochs_to_threshold(h, thr).is_some())
                .count() as f64
                / n_trials as f64
        };
        rows.push(AggregateRow {
            condition,
            train_size,
            hidden_size,
            metric: "final_error".into(),
            median: Some(percentile(&errors, 0.5)),
            p25: Some(percentile(&errors, 0.25)),
            p75: Some(percentile(&errors, 0.75)),
            success_rate: success(primary),
            n_trials,
        });

        for &thr in thresholds {
            let epochs: Vec<f64> = group
                .iter()
                .filter(|h| !h.diverged)
                .filter_map(|h| epochs_to_threshold(h, thr).map(|e| e as f64))
                .collect();
            let epochs = sorted(epochs);
            let stats = if epochs.is_empty() {
                (None, None, None)
            } else {
                (
                    Some(percentile(&epochs, 0.5)),
                    Some(percentile(&epochs, 0.25)),
                    Some(percentile(&epochs, 0.75)),
                )
            };
            rows.push(AggregateRow {
                condition,
                train_size,
                hidden_size,
                metric: format!("epochs_to_{thr}"),
                median: stats.0,
                p25: stats.1,
                p75: stats.2,
                success_rate: success(thr),
                n_trials,
            });
        }
    }
    rows
}

pub(crate) struct SweepJob {
    pub condition: Condition,
    pub train_size: usize,
    pub hidden_size: usize,
    pub arch: Vec<usize>,
    pub trial: u64,
}

/// Run every (condition x train size x hidden size x trial) cell of the
/// config. All conditions of a trial share the seed tuple, dataset,
/// splits and batch orderings.
pub fn run_xor_sweep(config: &ExperimentConfig) -> Result<SweepResult, HarnessError> {
    run_sweep(config, None)
}

pub(crate) fn run_sweep(
    config: &ExperimentConfig,
    source: Option<&TransferSource>,
) -> Result<SweepResult, HarnessError> {
    config.validate()?;
    let archs = config.swept_archs()?;
    let max_train = *config.train_sizes.iter().max().unwrap();
    let activations = config.activations();
    let loss = config.loss_kind();

    let mut jobs: Vec<(SeedTuple, SweepJob)> = Vec::new();
    for trial in 0..config.trials {
        let tuple = SeedTuple::for_trial(config.seed_base, trial);
        for (hidden, arch) in &archs {
            for &train_size in &config.train_sizes {
                for &condition in &config.conditions {
                    jobs.push((
                        tuple,
                        SweepJob {
                            condition,
                            train_size,
                            hidden_size: *hidden,
                            arch: arch.clone(),
                            trial,
                        },
                    ));
                }
            }
        }
    }

    // Trials are seeded jobs over immutable inputs; the worker pool only
    // decides scheduling, never results. Data and splits are built once
    // per trial index and shared across that trial's conditions.
    let mut histories: Vec<TrialHistory> = Vec::with_capacity(jobs.len());
    let per_trial: Vec<Result<Vec<TrialHistory>, HarnessError>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let tuple = SeedTuple::for_trial(config.seed_base, trial);
            let data = config
                .task
                .materialize(max_train + config.validation_size(), tuple.data)?;
            let splits = make_splits(
                &data,
                &SplitPlan {
                    train_sizes: config.train_sizes.clone(),
                    validation_size: config.validation_size(),
                    sample_seed: tuple.data,
                    batch_seed: tuple.batch,
                    batch_size: config.batch_size,
                },
            )?;
            jobs.iter()
                .filter(|(t, _)| *t == tuple)
                .map(|(_, job)| {
                    run_trial(&TrialSpec {
                        condition: job.condition,
                        data: &data,
                        splits: &splits,
                        train_size: job.train_size,
                        hidden_size: job.hidden_size,
                        arch: job.arch.clone(),
                        activations: activations.clone(),
                        loss,
                        epochs: config.epochs,
                        lr: config.lr,
                        reset_method: config.reset_method,
                        epsilon: config.epsilon,
                        seeds: tuple,
                        trial: job.trial,
                        transfer_source: source,
                    })
                })
                .collect()
        })
        .collect();
    for r in per_trial {
        histories.extend(r?);
    }
    histories.sort_by_key(|h| (h.condition.name(), h.hidden_size, h.train_size, h.trial));
    let rows = aggregate(&histories, &config.thresholds);
    Ok(SweepResult { histories, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::TaskSpec;
    use crate::polarity::ResetMethod;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&v, 0.25), 1.75);
        assert_eq!(percentile(&[7.0], 0.75), 7.0);
    }

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            task: TaskSpec::Xor { dim: 5 },
            arch: vec![5, 12, 1],
            conditions: vec![Condition::FluidRandom, Condition::FrozenSufficient],
            train_sizes: vec![40, 60],
            hidden_sizes: vec![],
            epochs: 4,
            lr: 0.001,
            batch_size: 10,
            trials: 3,
            thresholds: vec![0.8],
            reset_method: ResetMethod::PosRand,
            epsilon: 1e-3,
            seed_base: 11,
            validation_size: Some(120),
            transfer: None,
        }
    }

    #[test]
    fn sweep_runs_full_cross_product() {
        let result = run_xor_sweep(&tiny_config()).unwrap();
        // 2 conditions x 2 sizes x 3 trials.
        assert_eq!(result.histories.len(), 12);
        let rows_for_cell: Vec<_> = result
            .rows
            .iter()
            .filter(|r| {
                r.condition == Condition::FluidRandom && r.train_size == 40 && r.metric == "final_error"
            })
            .collect();
        assert_eq!(rows_for_cell.len(), 1);
        assert_eq!(rows_for_cell[0].n_trials, 3);
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = run_xor_sweep(&tiny_config()).unwrap();
        let b = run_xor_sweep(&tiny_config()).unwrap();
        assert_eq!(a.histories, b.histories);
    }

    #[test]
    fn single_cell_medians_match_direct_computation() {
        let mut config = tiny_config();
        config.conditions = vec![Condition::FluidRandom];
        config.train_sizes = vec![40];
        let result = run_xor_sweep(&config).unwrap();
        let mut errors: Vec<f64> = result.histories.iter().map(final_error).collect();
        errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = percentile(&errors, 0.5);
        assert_eq!(
            result.median_final_error(Condition::FluidRandom, 40, 12),
            Some(expected)
        );
    }

    #[test]
    fn aggregate_recomputes_from_raw_histories() {
        let result = run_xor_sweep(&tiny_config()).unwrap();
        let recomputed = aggregate(&result.histories, &[0.8]);
        assert_eq!(result.rows, recomputed);
    }
}
