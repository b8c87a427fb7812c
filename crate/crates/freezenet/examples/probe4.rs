// Scratch probe for flip-ratio trends. Not part of the deliverable set.

use freezenet::harness::{run_xor_sweep, Condition, ExperimentConfig, TaskSpec};
use freezenet::polarity::ResetMethod;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let config = ExperimentConfig {
        task: TaskSpec::Xor { dim: 5 },
        arch: vec![5, 64, 1],
        conditions: vec![Condition::FluidRandom, Condition::FrozenSufficient],
        train_sizes: vec![60, 72],
        hidden_sizes: vec![],
        epochs: 100,
        lr: 0.001,
        batch_size: 5,
        trials: 30,
        thresholds: vec![0.8],
        reset_method: ResetMethod::PosRand,
        epsilon: 1e-3,
        seed_base: seed,
        validation_size: Some(1000),
        transfer: None,
    };
    let t0 = std::time::Instant::now();
    let sweep = run_xor_sweep(&config).unwrap();
    println!("seed={seed} took {:?}", t0.elapsed());
    for size in [60usize, 72] {
        let fs = sweep
            .median_epochs_to(Condition::FrozenSufficient, size, 64, 0.8)
            .unwrap();
        let fl = sweep
            .median_epochs_to(Condition::FluidRandom, size, 64, 0.8)
            .unwrap();
        let fs_err = sweep
            .median_final_error(Condition::FrozenSufficient, size, 64)
            .unwrap();
        let fl_err = sweep
            .median_final_error(Condition::FluidRandom, size, 64)
            .unwrap();
        println!(
            "size={size}: ratio={:.3} (fs={fs} fluid={fl})  err fs={fs_err:.4} fluid={fl_err:.4} ok={}",
            fs / fl,
            fs / fl <= 0.8 && fs_err <= fl_err
        );
    }
    // Flip-ratio trend for fluid runs, per layer: per-trial windows.
    for layer in 0..2usize {
        for size in [60usize, 72] {
            let mut early = Vec::new();
            let mut late = Vec::new();
            for h in sweep
                .histories
                .iter()
                .filter(|h| h.condition == Condition::FluidRandom && h.train_size == size)
            {
                early.push((0..5).map(|e| h.flip_ratios[e][layer]).sum::<f64>() / 5.0);
                late.push((44..50).map(|e| h.flip_ratios[e][layer]).sum::<f64>() / 6.0);
            }
            println!(
                "layer={layer} size={size}: early_median={:.6} late_median={:.6} greater={}",
                median(early.clone()),
                median(late.clone()),
                median(early) > median(late)
            );
        }
    }
}
