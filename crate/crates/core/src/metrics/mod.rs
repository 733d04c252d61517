//! Presentation-attack-detection metrics.
//!
//! Scores are live probabilities. A sample is classified spoof iff its score
//! is strictly below the operating threshold, so `score == threshold` counts
//! as live.
//!
//! * APCER: fraction of attack presentations accepted as live.
//! * BPCER: fraction of bonafide presentations rejected as spoof.
//! * ACER: mean of APCER and BPCER.
//! * AUC: probability that a random live score exceeds a random spoof score,
//!   ties counted one half (Mann–Whitney).
//! * EER: discrete sweep over every distinct score (plus one cut above the
//!   maximum); reports `(FAR + FRR) / 2` where `|FAR - FRR|` is smallest.

mod report;
mod scores;

use std::collections::BTreeMap;

use crate::data::Label;
use crate::error::{Error, Result};

pub use report::{full_report, ApcerVariant, MetricsReport};
pub use scores::{read_score_file, write_score_file};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub id: String,
    /// Live probability.
    pub score: f64,
    pub label: Label,
    pub attack_type: Option<String>,
}

impl Prediction {
    pub fn new(score: f64, label: Label) -> Self {
        Self {
            id: String::new(),
            score,
            label,
            attack_type: None,
        }
    }

    pub fn tagged(score: f64, label: Label, attack_type: impl Into<String>) -> Self {
        Self {
            attack_type: Some(attack_type.into()),
            ..Self::new(score, label)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PredictionSet {
    records: Vec<Prediction>,
}

impl PredictionSet {
    pub fn new(records: Vec<Prediction>) -> Result<Self> {
        if let Some(bad) = records.iter().find(|r| !(0.0..=1.0).contains(&r.score)) {
            return Err(Error::MetricDefinition {
                metric: "score",
                reason: format!("score {} of `{}` is outside [0, 1]", bad.score, bad.id),
            });
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Prediction] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    fn with_label(&self, label: Label) -> impl Iterator<Item = &Prediction> {
        self.records.iter().filter(move |r| r.label == label)
    }
}

pub fn classify(score: f64, threshold: f64) -> Label {
    if score < threshold {
        Label::Spoof
    } else {
        Label::Live
    }
}

fn require(preds: &PredictionSet, label: Label, metric: &'static str) -> Result<usize> {
    match preds.count(label) {
        0 => Err(Error::UndefinedMetric {
            metric,
            reason: format!("no {label} records"),
        }),
        n => Ok(n),
    }
}

/// Fraction of spoof records classified live.
pub fn apcer(preds: &PredictionSet, threshold: f64) -> Result<f64> {
    let n = require(preds, Label::Spoof, "APCER")?;
    let accepted = preds
        .with_label(Label::Spoof)
        .filter(|r| classify(r.score, threshold) == Label::Live)
        .count();
    Ok(accepted as f64 / n as f64)
}

/// APCER of each attack type. Every spoof record must carry a tag.
pub fn apcer_per_attack(preds: &PredictionSet, threshold: f64) -> Result<BTreeMap<String, f64>> {
    require(preds, Label::Spoof, "APCER")?;
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in preds.with_label(Label::Spoof) {
        let tag = r.attack_type.as_deref().ok_or_else(|| Error::MetricDefinition {
            metric: "worst-case APCER",
            reason: format!("spoof record `{}` has no attack type", r.id),
        })?;
        let entry = tally.entry(tag.to_string()).or_default();
        entry.1 += 1;
        if classify(r.score, threshold) == Label::Live {
            entry.0 += 1;
        }
    }
    Ok(tally
        .into_iter()
        .map(|(k, (acc, n))| (k, acc as f64 / n as f64))
        .collect())
}

/// Maximum per-attack-type APCER.
pub fn apcer_worst_case(preds: &PredictionSet, threshold: f64) -> Result<f64> {
    Ok(apcer_per_attack(preds, threshold)?.into_values().fold(0.0, f64::max))
}

/// Fraction of live records classified spoof.
pub fn bpcer(preds: &PredictionSet, threshold: f64) -> Result<f64> {
    let n = require(preds, Label::Live, "BPCER")?;
    let rejected = preds
        .with_label(Label::Live)
        .filter(|r| classify(r.score, threshold) == Label::Spoof)
        .count();
    Ok(rejected as f64 / n as f64)
}

pub fn acer(apcer: f64, bpcer: f64) -> f64 {
    (apcer + bpcer) / 2.0
}

pub fn acc(preds: &PredictionSet, threshold: f64) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::UndefinedMetric {
            metric: "ACC",
            reason: "no records".into(),
        });
    }
    let correct = preds
        .records
        .iter()
        .filter(|r| classify(r.score, threshold) == r.label)
        .count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Rank-statistic AUC with tied scores sharing their average rank.
pub fn auc(preds: &PredictionSet) -> Result<f64> {
    let n_live = require(preds, Label::Live, "AUC")?;
    let n_spoof = require(preds, Label::Spoof, "AUC")?;
    let mut sorted: Vec<&Prediction> = preds.records.iter().collect();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score));
    let mut live_rank_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].score == sorted[i].score {
            j += 1;
        }
        // 1-based ranks i+1..=j share their mean
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let live_in_group = sorted[i..j].iter().filter(|r| r.label == Label::Live).count();
        live_rank_sum += avg_rank * live_in_group as f64;
        i = j;
    }
    let u = live_rank_sum - (n_live * (n_live + 1)) as f64 / 2.0;
    Ok(u / (n_live as f64 * n_spoof as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eer {
    pub rate: f64,
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

/// Equal error rate by discrete threshold sweep.
///
/// Candidate thresholds are the distinct scores plus one value just above the
/// maximum. When two adjacent cuts straddle the crossing with equal
/// `|FAR - FRR|`, the reported rate is the mean of their midpoints and the
/// lower threshold is returned.
pub fn eer(preds: &PredictionSet) -> Result<Eer> {
    let n_live = require(preds, Label::Live, "EER")?;
    let n_spoof = require(preds, Label::Spoof, "EER")?;
    let mut sorted: Vec<(f64, Label)> = preds.records.iter().map(|r| (r.score, r.label)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // (threshold, spoof >= t, live < t)
    let mut cuts: Vec<(f64, usize, usize)> = Vec::new();
    let mut live_below = 0;
    let mut spoof_at_or_above = n_spoof;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        cuts.push((t, spoof_at_or_above, live_below));
        while i < sorted.len() && sorted[i].0 == t {
            match sorted[i].1 {
                Label::Live => live_below += 1,
                Label::Spoof => spoof_at_or_above -= 1,
            }
            i += 1;
        }
    }
    let max = sorted.last().expect("non-empty").0;
    cuts.push((next_up(max), spoof_at_or_above, live_below));

    // |FAR - FRR| compared exactly as |a*n_live - b*n_spoof|
    let gap = |a: usize, b: usize| (a as i128 * n_live as i128 - b as i128 * n_spoof as i128).abs();
    let best = cuts.iter().map(|&(_, a, b)| gap(a, b)).min().expect("non-empty");
    let tied: Vec<&(f64, usize, usize)> = cuts.iter().filter(|&&(_, a, b)| gap(a, b) == best).collect();
    let far_frr = |&(_, a, b): &(f64, usize, usize)| (a as f64 / n_spoof as f64, b as f64 / n_live as f64);
    let (far, frr) = far_frr(tied[0]);
    let rate = tied
        .iter()
        .map(|c| {
            let (fa, fr) = far_frr(c);
            (fa + fr) / 2.0
        })
        .sum::<f64>()
        / tied.len() as f64;
    Ok(Eer {
        rate,
        threshold: tied[0].0,
        far,
        frr,
    })
}
