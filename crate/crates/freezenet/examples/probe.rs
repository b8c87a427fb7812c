// Scratch probe for schedule tuning. Not part of the deliverable set.

use freezenet::harness::{run_xor_sweep, Condition, ExperimentConfig, TaskSpec};
use freezenet::polarity::ResetMethod;

fn main() {
    let batch: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let epochs: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let trials: u64 = std::env::args()
        .nth(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let config = ExperimentConfig {
        task: TaskSpec::Xor { dim: 5 },
        arch: vec![5, 64, 1],
        conditions: vec![
            Condition::FrozenSufficient,
            Condition::FrozenRandom,
            Condition::FluidRandom,
        ],
        train_sizes: vec![60, 72],
        hidden_sizes: vec![],
        epochs,
        lr: 0.001,
        batch_size: batch,
        trials,
        thresholds: vec![0.8],
        reset_method: ResetMethod::PosRand,
        epsilon: 1e-3,
        seed_base: 1,
        validation_size: Some(1000),
        transfer: None,
    };
    let t0 = std::time::Instant::now();
    let sweep = run_xor_sweep(&config).unwrap();
    let elapsed = t0.elapsed();
    println!("batch={batch} epochs={epochs} trials={trials} took {elapsed:?}");
    for size in [60usize, 72] {
        for cond in [
            Condition::FrozenSufficient,
            Condition::FrozenRandom,
            Condition::FluidRandom,
        ] {
            let err = sweep.median_final_error(cond, size, 64).unwrap();
            let succ = sweep.success_rate(cond, size, 64).unwrap();
            let epochs_med = sweep.median_epochs_to(cond, size, 64, 0.8);
            println!(
                "size={size} {:<20} median_err={err:.4} success={succ:.2} med_epochs80={epochs_med:?}",
                cond.name()
            );
        }
        let fs = sweep.median_epochs_to(Condition::FrozenSufficient, size, 64, 0.8);
        let fl = sweep.median_epochs_to(Condition::FluidRandom, size, 64, 0.8);
        if let (Some(a), Some(b)) = (fs, fl) {
            println!("size={size} ratio frozen_sufficient/fluid = {:.3}", a / b);
        }
    }
}
