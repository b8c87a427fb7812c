// Scratch probe for the hidden-width sweep. Not part of the deliverable set.

use freezenet::harness::{run_xor_sweep, Condition, ExperimentConfig, TaskSpec};
use freezenet::polarity::ResetMethod;
use freezenet::theory::prob_representable_hd;

fn main() {
    let batch: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let trials: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    let config = ExperimentConfig {
        task: TaskSpec::Xor { dim: 5 },
        arch: vec![5, 10, 1],
        conditions: vec![Condition::FrozenRandom],
        train_sizes: vec![500],
        hidden_sizes: vec![10, 15, 20, 30],
        epochs: 100,
        lr: 0.001,
        batch_size: batch,
        trials,
        thresholds: vec![0.8],
        reset_method: ResetMethod::PosRand,
        epsilon: 1e-3,
        seed_base: 2,
        validation_size: Some(1000),
        transfer: None,
    };
    let t0 = std::time::Instant::now();
    let sweep = run_xor_sweep(&config).unwrap();
    println!("batch={batch} trials={trials} took {:?}", t0.elapsed());
    for h in [10u32, 15, 20, 30] {
        let success = sweep
            .success_rate(Condition::FrozenRandom, 500, h as usize)
            .unwrap();
        let theory = prob_representable_hd(h, 5).unwrap().to_f64();
        println!(
            "hidden={h:<3} success={success:.3} theory={theory:.3} |diff|={:.3}",
            (success - theory).abs()
        );
    }
}
