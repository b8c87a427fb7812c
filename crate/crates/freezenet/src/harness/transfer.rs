//! Polarity-vs-weight transfer experiments.
//!
//! A source network is trained once, its sign pattern and weights are
//! extracted, and the configured conditions are swept over the target
//! task's train sizes. Pairwise final-error comparisons use the
//! Mann-Whitney U test with Holm-Bonferroni correction over the whole
//! comparison family.

use super::sweep::run_sweep;
use super::{
    final_error, Condition, ExperimentConfig, HarnessError, SeedTuple, SweepResult, TransferSource,
    TrialSpec,
};
use crate::data::{make_splits, SplitPlan};
use crate::nn::evaluate;
use crate::seeds;
use crate::stats::{holm_bonferroni, mann_whitney_u};

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRow {
    pub train_size: usize,
    pub hidden_size: usize,
    pub condition_a: Condition,
    pub condition_b: Condition,
    pub u_statistic: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone)]
pub struct TransferResult {
    pub sweep: SweepResult,
    pub significance: Vec<SignificanceRow>,
    pub source_val_accuracy: f64,
}

/// Train the source network the transfer conditions derive from: a
/// fluid run on the source task with its own derived seed stream.
fn train_source(config: &ExperimentConfig) -> Result<(TransferSource, f64), HarnessError> {
    let transfer = config
        .transfer
        .as_ref()
        .ok_or_else(|| HarnessError::Config("transfer: section missing".into()))?;
    let tuple = SeedTuple::for_trial(seeds::derive(config.seed_base, "source", 0), 0);
    let data = transfer
        .source_task
        .materialize(transfer.source_train_size + config.validation_size(), tuple.data)?;
    let splits = make_splits(
        &data,
        &SplitPlan {
            train_sizes: vec![transfer.source_train_size],
            validation_size: config.validation_size(),
            sample_seed: tuple.data,
            batch_seed: tuple.batch,
            batch_size: config.batch_size,
        },
    )?;
    let spec = TrialSpec {
        condition: Condition::FluidRandom,
        data: &data,
        splits: &splits,
        train_size: transfer.source_train_size,
        hidden_size: if config.arch.len() == 3 { config.arch[1] } else { 0 },
        arch: config.arch.clone(),
        activations: config.activations(),
        loss: config.loss_kind(),
        epochs: transfer.source_epochs,
        lr: config.lr,
        reset_method: config.reset_method,
        epsilon: config.epsilon,
        seeds: tuple,
        trial: 0,
        transfer_source: None,
    };
    // Re-run the training loop but keep the final network. run_trial
    // only returns the history, so the source is trained directly here.
    let net = train_and_keep_network(&spec)?;
    let (val_x, val_y) = data.subset(splits.validation());
    let (accuracy, _) = evaluate(&net, &val_x, &val_y, config.loss_kind())?;
    if accuracy < transfer.floor_accuracy {
        return Err(HarnessError::SourceBelowFloor {
            accuracy,
            floor: transfer.floor_accuracy,
        });
    }
    Ok((TransferSource::from_network(net), accuracy))
}

fn train_and_keep_network(spec: &TrialSpec) -> Result<crate::nn::Network, HarnessError> {
    use crate::nn::{adam_step, loss_and_grads, AdamParams, AdamState};
    use rand::SeedableRng;

    let (mut net, template) = super::build_initial_network(spec)?;
    let mut adam = AdamState::new(&net, AdamParams::with_lr(spec.lr));
    let mut reset_rng = rand_chacha::ChaCha8Rng::seed_from_u64(seeds::derive(
        spec.seeds.polarity,
        "reset",
        0,
    ));
    for epoch in 0..spec.epochs {
        for batch in spec.splits.batch_order(spec.train_size, epoch)? {
            let (x, y) = spec.data.subset(&batch);
            let (loss, grads) = loss_and_grads(&net, &x, &y, spec.loss)?;
            if !loss.is_finite() {
                return Err(HarnessError::Config(
                    "source training diverged; adjust the source schedule".into(),
                ));
            }
            adam_step(&mut net, &grads, &mut adam)?;
            if let Some(t) = &template {
                crate::polarity::enforce_template(
                    &mut net,
                    t,
                    spec.reset_method,
                    spec.epsilon,
                    &mut reset_rng,
                )?;
            }
        }
    }
    Ok(net)
}

/// All pairwise condition comparisons of final error, per train size,
/// Holm-corrected over the full family.
fn significance_table(sweep: &SweepResult) -> Vec<SignificanceRow> {
    let mut cells: Vec<(usize, usize)> = sweep
        .histories
        .iter()
        .map(|h| (h.train_size, h.hidden_size))
        .collect();
    cells.sort_unstable();
    cells.dedup();
    let mut conditions: Vec<Condition> = sweep.histories.iter().map(|h| h.condition).collect();
    conditions.sort_by_key(|c| c.name());
    conditions.dedup();

    let mut rows = Vec::new();
    for (train_size, hidden_size) in cells {
        for (i, &a) in conditions.iter().enumerate() {
            for &b in &conditions[i + 1..] {
                let errors = |c: Condition| -> Vec<f64> {
                    sweep
                        .histories
                        .iter()
                        .filter(|h| {
                            h.condition == c
                                && h.train_size == train_size
                                && h.hidden_size == hidden_size
                        })
                        .map(final_error)
                        .collect()
                };
                let (xa, xb) = (errors(a), errors(b));
                if xa.is_empty() || xb.is_empty() {
                    continue;
                }
                let test = mann_whitney_u(&xa, &xb).expect("final errors are finite");
                rows.push(SignificanceRow {
                    train_size,
                    hidden_size,
                    condition_a: a,
                    condition_b: b,
                    u_statistic: test.u,
                    p_raw: test.p_value,
                    p_adjusted: f64::NAN,
                });
            }
        }
    }
    let adjusted = holm_bonferroni(&rows.iter().map(|r| r.p_raw).collect::<Vec<_>>());
    for (row, adj) in rows.iter_mut().zip(adjusted) {
        row.p_adjusted = adj;
    }
    rows
}

/// Train a source network, derive its polarity template and weights,
/// then sweep the configured conditions over the target task.
pub fn run_transfer_experiment(config: &ExperimentConfig) -> Result<TransferResult, HarnessError> {
    config.validate()?;
    let (source, source_val_accuracy) = train_source(config)?;
    let sweep = run_sweep(config, Some(&source))?;
    let significance = significance_table(&sweep);
    Ok(TransferResult {
        sweep,
        significance,
        source_val_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{TaskSpec, TransferConfig};
    use crate::polarity::ResetMethod;

    fn transfer_config() -> ExperimentConfig {
        ExperimentConfig {
            task: TaskSpec::SynthImages {
                side: 8,
                noise: 0.3,
                task_seed: 5,
            },
            arch: vec![64, 12, 1],
            conditions: vec![
                Condition::FluidRandom,
                Condition::FluidTransferredPolarity,
                Condition::FrozenTransferredPolarity,
                Condition::FluidTransferredWeight,
            ],
            train_sizes: vec![16, 32],
            hidden_sizes: vec![],
            epochs: 6,
            lr: 0.002,
            batch_size: 8,
            trials: 4,
            thresholds: vec![0.8],
            reset_method: ResetMethod::PosRand,
            epsilon: 1e-3,
            seed_base: 21,
            validation_size: Some(200),
            transfer: Some(TransferConfig {
                source_task: TaskSpec::SynthImages {
                    side: 8,
                    noise: 0.2,
                    task_seed: 5,
                },
                source_train_size: 300,
                source_epochs: 30,
                floor_accuracy: 0.7,
            }),
        }
    }

    #[test]
    fn transfer_produces_full_sweep_and_significance() {
        let result = run_transfer_experiment(&transfer_config()).unwrap();
        assert!(result.source_val_accuracy >= 0.7);
        // 4 conditions x 2 sizes x 4 trials.
        assert_eq!(result.sweep.histories.len(), 32);
        // 6 condition pairs x 2 sizes.
        assert_eq!(result.significance.len(), 12);
        for row in &result.significance {
            assert!(row.p_adjusted >= row.p_raw - 1e-15);
            assert!(row.p_adjusted <= 1.0);
        }
    }

    #[test]
    fn refuses_weak_source() {
        let mut config = transfer_config();
        config.transfer.as_mut().unwrap().source_epochs = 1;
        config.transfer.as_mut().unwrap().source_train_size = 8;
        config.transfer.as_mut().unwrap().floor_accuracy = 0.99;
        match run_transfer_experiment(&config) {
            Err(HarnessError::SourceBelowFloor { accuracy, floor }) => {
                assert!(accuracy < floor);
            }
            other => panic!("expected floor refusal, got {other:?}"),
        }
    }

    #[test]
    fn polarity_transfer_keeps_baseline_magnitudes() {
        let config = transfer_config();
        let (source, _) = train_source(&config).unwrap();
        let tuple = SeedTuple::for_trial(config.seed_base, 0);
        let data = config.task.materialize(400, tuple.data).unwrap();
        let splits = make_splits(
            &data,
            &SplitPlan {
                train_sizes: vec![32],
                validation_size: 200,
                sample_seed: tuple.data,
                batch_seed: tuple.batch,
                batch_size: 8,
            },
        )
        .unwrap();
        let spec_for = |condition| TrialSpec {
            condition,
            data: &data,
            splits: &splits,
            train_size: 32,
            hidden_size: 12,
            arch: config.arch.clone(),
            activations: config.activations(),
            loss: config.loss_kind(),
            epochs: 1,
            lr: config.lr,
            reset_method: config.reset_method,
            epsilon: config.epsilon,
            seeds: tuple,
            trial: 0,
            transfer_source: Some(&source),
        };
        let (baseline, _) =
            super::super::build_initial_network(&spec_for(Condition::FluidRandom)).unwrap();
        let (polarity, _) =
            super::super::build_initial_network(&spec_for(Condition::FrozenTransferredPolarity))
                .unwrap();
        for (a, b) in baseline.layers().iter().zip(polarity.layers()) {
            for (&wa, &wb) in a.weights().iter().zip(b.weights()) {
                assert_eq!(wa.abs(), wb.abs());
            }
        }
        let (weight, _) =
            super::super::build_initial_network(&spec_for(Condition::FluidTransferredWeight))
                .unwrap();
        assert_eq!(&weight, &source.weights);
    }
}
