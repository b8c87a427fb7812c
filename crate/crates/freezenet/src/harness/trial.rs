//! One seeded training run under one condition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Condition, HarnessError, SeedTuple, TrialHistory};
use crate::data::{Dataset, Splits};
use crate::nn::{
    adam_step, evaluate, init_glorot, loss_and_grads, Activation, AdamParams, AdamState, InitKind,
    LossKind, Matrix, Network,
};
use crate::polarity::{
    apply_template, enforce_template, extract_polarity, flip_ratio, template_from_rule_xor,
    template_random, PolarityTemplate, ResetMethod,
};
use crate::seeds;

/// What a trained source network contributes to transfer conditions.
#[derive(Debug, Clone)]
pub struct TransferSource {
    pub template: PolarityTemplate,
    pub weights: Network,
}

impl TransferSource {
    pub fn from_network(net: Network) -> Self {
        TransferSource {
            template: extract_polarity(&net),
            weights: net,
        }
    }
}

pub struct TrialSpec<'a> {
    pub condition: Condition,
    pub data: &'a Dataset,
    pub splits: &'a Splits,
    pub train_size: usize,
    pub hidden_size: usize,
    pub arch: Vec<usize>,
    pub activations: Vec<Activation>,
    pub loss: LossKind,
    pub epochs: usize,
    pub lr: f64,
    pub reset_method: ResetMethod,
    pub epsilon: f64,
    pub seeds: SeedTuple,
    pub trial: u64,
    pub transfer_source: Option<&'a TransferSource>,
}

/// Initial network and (for frozen conditions) the template to enforce.
/// All non-weight-transfer conditions share the magnitude draw, so their
/// initial |W| tensors are elementwise identical.
pub fn build_initial_network(
    spec: &TrialSpec,
) -> Result<(Network, Option<PolarityTemplate>), HarnessError> {
    let base = init_glorot(
        &spec.arch,
        &spec.activations,
        InitKind::Uniform,
        spec.seeds.magnitude,
    )?;
    let source_for = |cond: Condition| {
        spec.transfer_source.ok_or_else(|| {
            HarnessError::Config(format!("condition {} needs a transfer source", cond.name()))
        })
    };
    match spec.condition {
        Condition::FluidRandom => Ok((base, None)),
        Condition::FrozenRandom => {
            let template = template_random(&spec.arch, spec.seeds.polarity)?;
            let net = apply_template(&base, &template)?;
            Ok((net, Some(template)))
        }
        Condition::FrozenSufficient => {
            let template = template_from_rule_xor(&spec.arch, spec.seeds.polarity)?;
            let net = apply_template(&base, &template)?;
            Ok((net, Some(template)))
        }
        Condition::FluidTransferredPolarity => {
            let source = source_for(spec.condition)?;
            let net = apply_template(&base, &source.template)?;
            Ok((net, None))
        }
        Condition::FrozenTransferredPolarity => {
            let source = source_for(spec.condition)?;
            let net = apply_template(&base, &source.template)?;
            Ok((net, Some(source.template.clone())))
        }
        Condition::FluidTransferredWeight => {
            let source = source_for(spec.condition)?;
            Ok((source.weights.clone(), None))
        }
        Condition::FrozenTransferredWeight => {
            let source = source_for(spec.condition)?;
            Ok((source.weights.clone(), Some(source.template.clone())))
        }
    }
}

/// Sentinel stored for train-loss entries after a divergence; accuracy
/// entries are padded with chance level instead.
pub const DIVERGED_LOSS: f64 = f64::MAX;

/// Train one network for the full epoch budget, enforcing the template
/// after every batch when the condition is frozen. A non-finite loss
/// marks the trial diverged: training stops, the history is padded to
/// full length at chance-level accuracy, and the flag is set.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialHistory, HarnessError> {
    let (mut net, template) = build_initial_network(spec)?;
    let mut adam = AdamState::new(&net, AdamParams::with_lr(spec.lr));
    let mut reset_rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seeds.polarity, "reset", 0));

    let (val_x, val_y): (Matrix, Vec<u32>) = spec.data.subset(spec.splits.validation());
    let chance = 1.0 / f64::from(spec.data.meta().class_count);

    let mut history = TrialHistory {
        condition: spec.condition,
        train_size: spec.train_size,
        hidden_size: spec.hidden_size,
        trial: spec.trial,
        seeds: spec.seeds,
        train_loss: Vec::with_capacity(spec.epochs),
        val_accuracy: Vec::with_capacity(spec.epochs),
        val_error: Vec::with_capacity(spec.epochs),
        flip_ratios: Vec::with_capacity(spec.epochs),
        corrections: Vec::with_capacity(spec.epochs),
        diverged: false,
    };

    let mut previous = net.clone();
    'epochs: for epoch in 0..spec.epochs {
        let batches = spec.splits.batch_order(spec.train_size, epoch)?;
        let mut loss_sum = 0.0;
        let mut corrections = 0u64;
        for batch in &batches {
            let (x, y) = spec.data.subset(batch);
            let (loss, grads) = loss_and_grads(&net, &x, &y, spec.loss)?;
            if !loss.is_finite() {
                history.diverged = true;
                break 'epochs;
            }
            adam_step(&mut net, &grads, &mut adam)?;
            if let Some(t) = &template {
                corrections +=
                    enforce_template(&mut net, t, spec.reset_method, spec.epsilon, &mut reset_rng)?;
            }
            loss_sum += loss;
        }
        if !net.is_finite() {
            history.diverged = true;
            break 'epochs;
        }
        let (acc, _) = evaluate(&net, &val_x, &val_y, spec.loss)?;
        history.train_loss.push(loss_sum / batches.len() as f64);
        history.val_accuracy.push(acc);
        history.val_error.push(1.0 - acc);
        history
            .flip_ratios
            .push(flip_ratio(&previous, &net)?.per_layer);
        history.corrections.push(corrections);
        previous = net.clone();
    }

    // Keep the history length equal to the epoch budget even when the
    // run diverged partway through.
    let layer_count = net.layers().len();
    while history.val_accuracy.len() < spec.epochs {
        history.train_loss.push(DIVERGED_LOSS);
        history.val_accuracy.push(chance);
        history.val_error.push(1.0 - chance);
        history.flip_ratios.push(vec![0.0; layer_count]);
        history.corrections.push(0);
    }
    Ok(history)
}
