//! Weight-sign templates and the post-batch enforcement step.
//!
//! A [`PolarityTemplate`] fixes one sign per weight (biases are never
//! constrained). [`enforce_template`] is the step that runs after every
//! batch update during frozen training: any weight whose sign is strictly
//! opposite to its template entry is reset by one of four methods.
//!
//! Zero-valued weights are treated as compliant with any template during
//! enforcement and extract as +1; this keeps the `Zero` reset stable and
//! extraction total.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::Network;

#[derive(Debug, Error)]
pub enum PolarityError {
    #[error("template shape mismatch: {0}")]
    Shape(String),
    #[error("sign rule not applicable: {0}")]
    RuleNotApplicable(String),
    #[error("template file error: {0}")]
    File(String),
}

/// Per-layer sign matrices with entries +1 or -1, shaped like the weight
/// matrices of a target architecture (row-major, `fan_in x fan_out`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarityTemplate {
    layers: Vec<SignMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    signs: Vec<i8>,
}

impl SignMatrix {
    fn new(rows: usize, cols: usize, signs: Vec<i8>) -> Result<Self, PolarityError> {
        if signs.len() != rows * cols {
            return Err(PolarityError::Shape(format!(
                "{} signs do not fill {rows}x{cols}",
                signs.len()
            )));
        }
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(PolarityError::Shape(format!(
                "sign entries must be +1 or -1, got {bad}"
            )));
        }
        Ok(SignMatrix { rows, cols, signs })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, row: usize, col: usize) -> i8 {
        self.signs[row * self.cols + col]
    }
}

impl PolarityTemplate {
    pub fn new(layers: Vec<SignMatrix>) -> Self {
        PolarityTemplate { layers }
    }

    pub fn layers(&self) -> &[SignMatrix] {
        &self.layers
    }

    /// Layer dimension chain this template fits, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.layers.iter().map(|l| l.rows).collect();
        if let Some(last) = self.layers.last() {
            dims.push(last.cols);
        }
        dims
    }

    pub fn matches_network(&self, net: &Network) -> bool {
        self.layers.len() == net.layers().len()
            && self
                .layers
                .iter()
                .zip(net.layers())
                .all(|(t, l)| t.rows == l.fan_in() && t.cols == l.fan_out())
    }

    fn check_network(&self, net: &Network) -> Result<(), PolarityError> {
        if self.matches_network(net) {
            Ok(())
        } else {
            Err(PolarityError::Shape(format!(
                "template fits dims {:?}, network has {:?}",
                self.dims(),
                net.dims()
            )))
        }
    }
}

/// How a sign-violating weight is reset after a batch update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMethod {
    /// Reset to the template sign times a fixed epsilon.
    PosCon,
    /// Reset to the template sign times a uniform draw from (0, epsilon].
    PosRand,
    /// Reset to exactly zero.
    Zero,
    /// Negate the weight, keeping its magnitude.
    Flip,
}

impl ResetMethod {
    pub fn needs_epsilon(&self) -> bool {
        matches!(self, ResetMethod::PosCon | ResetMethod::PosRand)
    }
}

fn sign_of(w: f64) -> i8 {
    if w > 0.0 {
        1
    } else if w < 0.0 {
        -1
    } else {
        0
    }
}

/// i.i.d. Bernoulli(0.5) signs for every weight of the architecture.
pub fn template_random(dims: &[usize], seed: u64) -> Result<PolarityTemplate, PolarityError> {
    if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
        return Err(PolarityError::Shape(format!("bad architecture {dims:?}")));
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let layers = dims
        .windows(2)
        .map(|pair| {
            let signs = (0..pair[0] * pair[1])
                .map(|_| if rng.random::<bool>() { 1i8 } else { -1i8 })
                .collect();
            SignMatrix::new(pair[0], pair[1], signs)
        })
        .collect::<Result<_, _>>()?;
    Ok(PolarityTemplate::new(layers))
}

/// Sufficient template for the XOR family on a single-hidden-layer
/// architecture: hidden input signs are drawn Bernoulli(0.5) and every
/// hidden unit's output-edge sign is set to the negated product of its
/// first two input signs, so each unit individually matches the sign
/// pattern of the working XOR constructions (for example
/// `sigmoid(-relu(x+y) + relu(x) + relu(y))`, whose units are (+,+,-),
/// (+,.,+) and (.,+,+)). Units with the opposite output sign can only
/// build the complement of XOR, which a fixed 0.5 decision threshold
/// never classifies above chance.
pub fn template_from_rule_xor(
    dims: &[usize],
    input_polarity_seed: u64,
) -> Result<PolarityTemplate, PolarityError> {
    if dims.len() != 3 {
        return Err(PolarityError::RuleNotApplicable(format!(
            "rule needs a single hidden layer, got {} layers",
            dims.len().saturating_sub(1)
        )));
    }
    if dims[0] < 2 {
        return Err(PolarityError::RuleNotApplicable(
            "rule needs at least 2 input dimensions".into(),
        ));
    }
    if dims[2] != 1 {
        return Err(PolarityError::RuleNotApplicable(
            "rule needs a single output unit".into(),
        ));
    }
    let random = template_random(dims, input_polarity_seed)?;
    let hidden = random.layers()[0].clone();
    let n_hidden = dims[1];
    let mut out_signs = Vec::with_capacity(n_hidden);
    for unit in 0..n_hidden {
        out_signs.push(-hidden.sign(0, unit) * hidden.sign(1, unit));
    }
    Ok(PolarityTemplate::new(vec![
        hidden,
        SignMatrix::new(n_hidden, 1, out_signs).expect("constructed signs are valid"),
    ]))
}

/// Read off the sign of every weight. Zero weights map to +1.
pub fn extract_polarity(net: &Network) -> PolarityTemplate {
    let layers = net
        .layers()
        .iter()
        .map(|l| {
            let signs = l
                .weights()
                .iter()
                .map(|&w| if w < 0.0 { -1i8 } else { 1i8 })
                .collect();
            SignMatrix::new(l.fan_in(), l.fan_out(), signs).expect("network shapes are valid")
        })
        .collect();
    PolarityTemplate::new(layers)
}

/// Number of exactly-zero weights, the tie-break counter for
/// [`extract_polarity`].
pub fn zero_weight_count(net: &Network) -> usize {
    net.layers()
        .iter()
        .map(|l| l.weights().iter().filter(|&&w| w == 0.0).count())
        .sum()
}

/// Re-sign every weight to the template, keeping magnitudes exactly:
/// `w' = |w| * t`. Biases are untouched.
pub fn apply_template(net: &Network, template: &PolarityTemplate) -> Result<Network, PolarityError> {
    template.check_network(net)?;
    let mut out = net.clone();
    for (layer, signs) in out.layers_mut().iter_mut().zip(template.layers()) {
        for (w, &s) in layer.weights_mut().iter_mut().zip(signs.signs()) {
            *w = w.abs() * f64::from(s);
        }
    }
    Ok(out)
}

/// Reset every weight whose sign strictly opposes its template entry,
/// returning how many were corrected. Zero weights are left alone.
pub fn enforce_template<R: Rng + ?Sized>(
    net: &mut Network,
    template: &PolarityTemplate,
    method: ResetMethod,
    epsilon: f64,
    rng: &mut R,
) -> Result<u64, PolarityError> {
    template.check_network(net)?;
    if method.needs_epsilon() && !(epsilon > 0.0) {
        return Err(PolarityError::Shape(format!(
            "reset method {method:?} needs epsilon > 0, got {epsilon}"
        )));
    }
    let mut corrected = 0u64;
    for (layer, signs) in net.layers_mut().iter_mut().zip(template.layers()) {
        for (w, &t) in layer.weights_mut().iter_mut().zip(signs.signs()) {
            let s = sign_of(*w);
            if s == 0 || s == t {
                continue;
            }
            corrected += 1;
            *w = match method {
                ResetMethod::PosCon => f64::from(t) * epsilon,
                // 1 - random() lies in (0, 1], so the reset magnitude
                // lies in (0, epsilon].
                ResetMethod::PosRand => f64::from(t) * epsilon * (1.0 - rng.random::<f64>()),
                ResetMethod::Zero => 0.0,
                ResetMethod::Flip => -*w,
            };
        }
    }
    Ok(corrected)
}

/// Per-layer fraction of weights (biases excluded) whose strict sign
/// changed between two snapshots of the same architecture. Transitions
/// to or from exactly zero do not count as flips.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipStats {
    pub per_layer: Vec<f64>,
}

pub fn flip_ratio(prev: &Network, curr: &Network) -> Result<FlipStats, PolarityError> {
    if prev.dims() != curr.dims() {
        return Err(PolarityError::Shape(format!(
            "architectures differ: {:?} vs {:?}",
            prev.dims(),
            curr.dims()
        )));
    }
    let per_layer = prev
        .layers()
        .iter()
        .zip(curr.layers())
        .map(|(a, b)| {
            let flipped = a
                .weights()
                .iter()
                .zip(b.weights())
                .filter(|&(&wa, &wb)| {
                    let (sa, sb) = (sign_of(wa), sign_of(wb));
                    sa != 0 && sb != 0 && sa != sb
                })
                .count();
            flipped as f64 / a.weights().len() as f64
        })
        .collect();
    Ok(FlipStats { per_layer })
}

/// Count of weights whose sign strictly opposes the template; zero after
/// any successful enforcement.
pub fn violation_count(net: &Network, template: &PolarityTemplate) -> Result<u64, PolarityError> {
    template.check_network(net)?;
    let mut count = 0u64;
    for (layer, signs) in net.layers().iter().zip(template.layers()) {
        for (&w, &t) in layer.weights().iter().zip(signs.signs()) {
            let s = sign_of(w);
            if s != 0 && s != t {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[derive(Serialize, Deserialize)]
struct TemplateFile {
    layers: Vec<Vec<Vec<i8>>>,
}

/// Template file format: `{"layers":[[[1,-1,...],...],...]}` with each
/// layer as its row-major sign matrix. Entries other than 1/-1 are
/// rejected.
pub fn template_to_json(template: &PolarityTemplate) -> String {
    let file = TemplateFile {
        layers: template
            .layers()
            .iter()
            .map(|m| {
                (0..m.rows)
                    .map(|r| m.signs[r * m.cols..(r + 1) * m.cols].to_vec())
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("template serialization cannot fail")
}

pub fn template_from_json(text: &str) -> Result<PolarityTemplate, PolarityError> {
    let file: TemplateFile =
        serde_json::from_str(text).map_err(|e| PolarityError::File(e.to_string()))?;
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, rows) in file.layers.into_iter().enumerate() {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(PolarityError::File(format!("layer {i} has ragged rows")));
        }
        let signs: Vec<i8> = rows.into_iter().flatten().collect();
        layers.push(
            SignMatrix::new(n_rows, n_cols, signs)
                .map_err(|e| PolarityError::File(format!("layer {i}: {e}")))?,
        );
    }
    Ok(PolarityTemplate::new(layers))
}

pub fn save_template(template: &PolarityTemplate, path: &Path) -> Result<(), PolarityError> {
    fs::write(path, template_to_json(template)).map_err(|e| PolarityError::File(e.to_string()))
}

pub fn load_template(path: &Path) -> Result<PolarityTemplate, PolarityError> {
    let text = fs::read_to_string(path).map_err(|e| PolarityError::File(e.to_string()))?;
    template_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_glorot, Activation, DenseLayer, InitKind, Matrix, Network};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const XOR_ACTS: [Activation; 2] = [Activation::Relu, Activation::Sigmoid];

    fn net_5_8_1(seed: u64) -> Network {
        init_glorot(&[5, 8, 1], &XOR_ACTS, InitKind::Uniform, seed).unwrap()
    }

    #[test]
    fn random_template_is_reproducible_and_balanced() {
        let a = template_random(&[100, 100, 1], 3).unwrap();
        let b = template_random(&[100, 100, 1], 3).unwrap();
        assert_eq!(a, b);
        let c = template_random(&[100, 100, 1], 4).unwrap();
        assert_ne!(a, c);
        let positives: usize = a.layers()[0].signs().iter().filter(|&&s| s == 1).count();
        let frac = positives as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&frac), "fraction {frac}");
    }

    #[test]
    fn xor_rule_ties_output_sign_to_input_signs() {
        let t = template_from_rule_xor(&[5, 64, 1], 11).unwrap();
        let hidden = &t.layers()[0];
        let out = &t.layers()[1];
        for unit in 0..64 {
            assert_eq!(
                out.sign(unit, 0),
                -hidden.sign(0, unit) * hidden.sign(1, unit),
                "unit {unit}"
            );
        }
    }

    #[test]
    fn xor_rule_matches_working_construction_patterns() {
        // The canonical solution -relu(x+y) + relu(x) + relu(y) uses
        // (+,+) inputs with a - output edge and mixed-sign inputs with a
        // + output edge; every generated unit must follow that pattern.
        for seed in 0..20u64 {
            let t = template_from_rule_xor(&[2, 16, 1], seed).unwrap();
            let hidden = &t.layers()[0];
            let out = &t.layers()[1];
            for unit in 0..16 {
                let (a, b) = (hidden.sign(0, unit), hidden.sign(1, unit));
                if a == b {
                    assert_eq!(out.sign(unit, 0), -1);
                } else {
                    assert_eq!(out.sign(unit, 0), 1);
                }
            }
        }
    }

    #[test]
    fn xor_rule_rejects_wrong_architecture() {
        assert!(template_from_rule_xor(&[5, 8, 8, 1], 0).is_err());
        assert!(template_from_rule_xor(&[1, 8, 1], 0).is_err());
        assert!(template_from_rule_xor(&[5, 8, 2], 0).is_err());
    }

    #[test]
    fn extraction_reads_signs() {
        let layer = DenseLayer::new(
            1,
            3,
            vec![-0.3, 0.0, 2.5],
            vec![0.0; 3],
            Activation::Identity,
        )
        .unwrap();
        let net = Network::new(vec![layer]).unwrap();
        let t = extract_polarity(&net);
        assert_eq!(t.layers()[0].signs(), &[-1, 1, 1]);
        assert_eq!(zero_weight_count(&net), 1);
    }

    #[test]
    fn apply_then_extract_round_trips() {
        let net = net_5_8_1(21);
        let t = template_random(&[5, 8, 1], 77).unwrap();
        let applied = apply_template(&net, &t).unwrap();
        assert_eq!(extract_polarity(&applied), t);
    }

    #[test]
    fn apply_preserves_magnitudes_exactly_and_is_idempotent() {
        let net = net_5_8_1(2);
        let t = template_random(&[5, 8, 1], 5).unwrap();
        let once = apply_template(&net, &t).unwrap();
        for (a, b) in net.layers().iter().zip(once.layers()) {
            for (&wa, &wb) in a.weights().iter().zip(b.weights()) {
                assert_eq!(wa.abs(), wb.abs());
            }
            assert_eq!(a.bias(), b.bias());
        }
        let twice = apply_template(&once, &t).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn apply_simple_example() {
        let layer =
            DenseLayer::new(1, 2, vec![-2.0, 3.0], vec![0.5, 0.5], Activation::Identity).unwrap();
        let net = Network::new(vec![layer]).unwrap();
        let t = PolarityTemplate::new(vec![SignMatrix::new(1, 2, vec![1, 1]).unwrap()]);
        let out = apply_template(&net, &t).unwrap();
        assert_eq!(out.layers()[0].weights(), &[2.0, 3.0]);
        assert_eq!(out.layers()[0].bias(), &[0.5, 0.5]);
    }

    #[test]
    fn apply_rejects_shape_mismatch() {
        let net = net_5_8_1(2);
        let t = template_random(&[5, 9, 1], 5).unwrap();
        assert!(apply_template(&net, &t).is_err());
    }

    fn single_weight_net(w: f64) -> Network {
        let layer = DenseLayer::new(1, 1, vec![w], vec![0.0], Activation::Identity).unwrap();
        Network::new(vec![layer]).unwrap()
    }

    fn plus_template() -> PolarityTemplate {
        PolarityTemplate::new(vec![SignMatrix::new(1, 1, vec![1]).unwrap()])
    }

    #[test]
    fn enforcement_reset_cases() {
        let t = plus_template();
        let mut rng = ChaCha8Rng::seed_from_u64(0);

        let mut net = single_weight_net(-0.3);
        let n = enforce_template(&mut net, &t, ResetMethod::Flip, 1e-3, &mut rng).unwrap();
        assert_eq!(n, 1);
        assert_eq!(net.layers()[0].weights()[0], 0.3);

        let mut net = single_weight_net(-0.3);
        enforce_template(&mut net, &t, ResetMethod::Zero, 1e-3, &mut rng).unwrap();
        assert_eq!(net.layers()[0].weights()[0], 0.0);

        let mut net = single_weight_net(-0.3);
        enforce_template(&mut net, &t, ResetMethod::PosCon, 1e-3, &mut rng).unwrap();
        assert_eq!(net.layers()[0].weights()[0], 1e-3);

        for _ in 0..200 {
            let mut net = single_weight_net(-0.3);
            enforce_template(&mut net, &t, ResetMethod::PosRand, 1e-3, &mut rng).unwrap();
            let w = net.layers()[0].weights()[0];
            assert!(w > 0.0 && w <= 1e-3, "posRand reset {w}");
        }
    }

    #[test]
    fn enforcement_leaves_compliant_weights_alone() {
        let t = plus_template();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for method in [
            ResetMethod::PosCon,
            ResetMethod::PosRand,
            ResetMethod::Zero,
            ResetMethod::Flip,
        ] {
            let mut net = single_weight_net(0.3);
            let n = enforce_template(&mut net, &t, method, 1e-3, &mut rng).unwrap();
            assert_eq!(n, 0);
            assert_eq!(net.layers()[0].weights()[0], 0.3);
        }
    }

    #[test]
    fn enforcement_treats_zero_as_compliant() {
        let t = plus_template();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = single_weight_net(0.0);
        let n = enforce_template(&mut net, &t, ResetMethod::Zero, 1e-3, &mut rng).unwrap();
        assert_eq!(n, 0);
        assert_eq!(net.layers()[0].weights()[0], 0.0);
    }

    #[test]
    fn enforcement_requires_positive_epsilon() {
        let t = plus_template();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = single_weight_net(-1.0);
        assert!(enforce_template(&mut net, &t, ResetMethod::PosRand, 0.0, &mut rng).is_err());
        assert!(enforce_template(&mut net, &t, ResetMethod::Zero, 0.0, &mut rng).is_ok());
    }

    #[test]
    fn enforcement_leaves_no_violations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for method in [
            ResetMethod::PosCon,
            ResetMethod::PosRand,
            ResetMethod::Zero,
            ResetMethod::Flip,
        ] {
            let mut net = net_5_8_1(33);
            let t = template_random(&[5, 8, 1], 44).unwrap();
            enforce_template(&mut net, &t, method, 1e-3, &mut rng).unwrap();
            assert_eq!(violation_count(&net, &t).unwrap(), 0, "{method:?}");
        }
    }

    #[test]
    fn flip_ratio_counts_strict_sign_changes() {
        let a = Network::new(vec![DenseLayer::new(
            2,
            2,
            vec![1.0, -1.0, 0.5, 0.0],
            vec![0.0; 2],
            Activation::Identity,
        )
        .unwrap()])
        .unwrap();
        assert_eq!(flip_ratio(&a, &a).unwrap().per_layer, vec![0.0]);
        let b = Network::new(vec![DenseLayer::new(
            2,
            2,
            vec![1.0, -1.0, -0.5, 1.0],
            vec![0.0; 2],
            Activation::Identity,
        )
        .unwrap()])
        .unwrap();
        // One of four weights flips strictly; the zero-to-nonzero
        // transition does not count.
        assert_eq!(flip_ratio(&a, &b).unwrap().per_layer, vec![0.25]);
    }

    #[test]
    fn flip_ratio_rejects_mismatched_architectures() {
        let a = net_5_8_1(1);
        let b = init_glorot(&[5, 9, 1], &XOR_ACTS, InitKind::Uniform, 1).unwrap();
        assert!(flip_ratio(&a, &b).is_err());
    }

    #[test]
    fn template_json_round_trip_and_validation() {
        let t = template_from_rule_xor(&[3, 4, 1], 8).unwrap();
        let text = template_to_json(&t);
        assert_eq!(template_from_json(&text).unwrap(), t);
        assert!(template_from_json(r#"{"layers":[[[1,0],[1,-1]]]}"#).is_err());
        assert!(template_from_json(r#"{"layers":[[[1,2],[1,-1]]]}"#).is_err());
    }
}
