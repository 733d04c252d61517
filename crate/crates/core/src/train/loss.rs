use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::vit::Logits;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` inside the loss.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossKind {
    Focal {
        #[serde(default = "default_gamma")]
        gamma: f64,
        /// Weights for (live, spoof).
        #[serde(default = "unit_weights")]
        class_weights: [f64; 2],
    },
    CrossEntropy,
}

fn default_gamma() -> f64 {
    2.0
}

fn unit_weights() -> [f64; 2] {
    [1.0, 1.0]
}

impl Default for LossKind {
    fn default() -> Self {
        LossKind::Focal {
            gamma: 2.0,
            class_weights: [1.0, 1.0],
        }
    }
}

fn true_class_prob(live_prob: f64, label: Label) -> f64 {
    let p = match label {
        Label::Live => live_prob,
        Label::Spoof => 1.0 - live_prob,
    };
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

fn focal_from_pt(pt: f64, gamma: f64, w: f64) -> f64 {
    let pt = pt.clamp(PROB_EPS, 1.0 - PROB_EPS);
    let modulator = if gamma == 0.0 { 1.0 } else { (1.0 - pt).powf(gamma) };
    -w * modulator * pt.ln()
}

/// `-w_label * (1 - p_t)^gamma * ln(p_t)`.
pub fn focal_loss(live_prob: f64, label: Label, gamma: f64, class_weights: [f64; 2]) -> f64 {
    focal_from_pt(true_class_prob(live_prob, label), gamma, class_weights[label.index()])
}

pub fn cross_entropy(live_prob: f64, label: Label) -> f64 {
    -true_class_prob(live_prob, label).ln()
}

/// Loss value and its gradient with respect to the two logits.
pub fn loss_and_grad(kind: &LossKind, logits: &Logits, label: Label) -> (f64, [f64; 2]) {
    let [a, b] = logits.values;
    let m = a.max(b);
    let (ea, eb) = ((a - m).exp(), (b - m).exp());
    let probs = [ea / (ea + eb), eb / (ea + eb)];
    let t = label.index();
    let pt = probs[t];
    let (gamma, w) = match *kind {
        LossKind::Focal { gamma, class_weights } => (gamma, class_weights[t]),
        LossKind::CrossEntropy => (0.0, 1.0),
    };
    let loss = focal_from_pt(pt, gamma, w);
    if !(PROB_EPS..=1.0 - PROB_EPS).contains(&pt) {
        // the clamp is flat here
        return (loss, [0.0, 0.0]);
    }
    let mut dl_dpt = -w * (1.0 - pt).powf(gamma) / pt;
    if gamma != 0.0 {
        dl_dpt += w * gamma * (1.0 - pt).powf(gamma - 1.0) * pt.ln();
    }
    let mut grad = [0.0; 2];
    for (j, g) in grad.iter_mut().enumerate() {
        let delta = if j == t { 1.0 } else { 0.0 };
        *g = dl_dpt * pt * (delta - probs[j]);
    }
    (loss, grad)
}
