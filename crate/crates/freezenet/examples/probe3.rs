// Scratch probe for the transfer layout. Not part of the deliverable set.

use freezenet::harness::{
    run_transfer_experiment, Condition, ExperimentConfig, TaskSpec, TransferConfig,
};
use freezenet::polarity::ResetMethod;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let noise_target: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let trials: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let batch: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10);
    let sizes: Vec<usize> = args
        .get(4)
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![20, 40]);
    let seed_base: u64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(3);
    let config = ExperimentConfig {
        task: TaskSpec::SynthImages {
            side: 16,
            noise: noise_target,
            task_seed: 7,
        },
        arch: vec![256, 64, 1],
        conditions: vec![
            Condition::FluidRandom,
            Condition::FrozenRandom,
            Condition::FluidTransferredPolarity,
            Condition::FrozenTransferredPolarity,
            Condition::FluidTransferredWeight,
            Condition::FrozenTransferredWeight,
        ],
        train_sizes: sizes.clone(),
        hidden_sizes: vec![],
        epochs: 100,
        lr: 0.001,
        batch_size: batch,
        trials,
        thresholds: vec![0.8],
        reset_method: ResetMethod::PosRand,
        epsilon: 1e-3,
        seed_base,
        validation_size: Some(1000),
        transfer: Some(TransferConfig {
            source_task: TaskSpec::SynthImages {
                side: 16,
                noise: 0.3,
                task_seed: 7,
            },
            source_train_size: 1500,
            source_epochs: 20,
            floor_accuracy: 0.9,
        }),
    };
    let t0 = std::time::Instant::now();
    let result = run_transfer_experiment(&config).unwrap();
    println!(
        "noise={noise_target} trials={trials} batch={batch} took {:?} source_acc={:.4}",
        t0.elapsed(),
        result.source_val_accuracy
    );
    for &size in &sizes {
        for cond in [
            Condition::FrozenTransferredPolarity,
            Condition::FluidTransferredPolarity,
            Condition::FluidTransferredWeight,
            Condition::FrozenTransferredWeight,
            Condition::FluidRandom,
            Condition::FrozenRandom,
        ] {
            let err = result.sweep.median_final_error(cond, size, 64).unwrap();
            println!("size={size} {:<28} median_err={err:.4}", cond.name());
        }
    }
    for row in &result.significance {
        if (row.condition_a == Condition::FrozenTransferredPolarity
            && row.condition_b == Condition::FluidRandom)
            || (row.condition_a == Condition::FluidRandom
                && row.condition_b == Condition::FrozenTransferredPolarity)
        {
            println!(
                "size={} frozen_tp vs fluid_random: U={} p_raw={:.3e} p_adj={:.3e}",
                row.train_size, row.u_statistic, row.p_raw, row.p_adjusted
            );
        }
    }
}
