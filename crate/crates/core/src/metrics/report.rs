use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{acc, acer, apcer, apcer_worst_case, auc, bpcer, classify, eer, PredictionSet};
use crate::data::{Label, UNKNOWN_TAG};
use crate::error::Result;

/// Which APCER definition feeds the headline `apcer` and `acer` fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApcerVariant {
    /// Over all attack presentations pooled together.
    #[default]
    Average,
    /// Maximum over attack types.
    WorstCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub apcer_variant: ApcerVariant,
    pub apcer: f64,
    pub apcer_worst: f64,
    pub bpcer: f64,
    pub acer: f64,
    pub auc: f64,
    pub acc: f64,
    pub eer: f64,
    pub eer_threshold: f64,
    pub threshold: f64,
    pub n_live: usize,
    pub n_spoof: usize,
    pub per_attack_apcer: BTreeMap<String, f64>,
    pub per_attack_count: BTreeMap<String, usize>,
}

impl MetricsReport {
    pub fn acer_identity_holds(&self) -> bool {
        (self.acer - (self.apcer + self.bpcer) / 2.0).abs() <= 1e-15
    }

    /// Fixed-field text form followed by the per-attack-type table.
    pub fn to_text(&self) -> String {
        let variant = match self.apcer_variant {
            ApcerVariant::Average => "average",
            ApcerVariant::WorstCase => "worst_case",
        };
        let mut out = String::new();
        let _ = writeln!(out, "apcer_variant: {variant}");
        for (k, v) in [
            ("apcer", self.apcer),
            ("apcer_worst", self.apcer_worst),
            ("bpcer", self.bpcer),
            ("acer", self.acer),
            ("auc", self.auc),
            ("acc", self.acc),
            ("eer", self.eer),
            ("eer_threshold", self.eer_threshold),
            ("threshold", self.threshold),
        ] {
            let _ = writeln!(out, "{k}: {v}");
        }
        let _ = writeln!(out, "n_live: {}", self.n_live);
        let _ = writeln!(out, "n_spoof: {}", self.n_spoof);
        let _ = writeln!(out, "\n[per_attack_apcer]");
        let _ = writeln!(out, "attack_type\tcount\tapcer");
        for (tag, rate) in &self.per_attack_apcer {
            let _ = writeln!(out, "{tag}\t{}\t{rate}", self.per_attack_count[tag]);
        }
        out
    }
}

/// Computes every metric at `threshold`. Untagged spoof records are grouped
/// under `Unknown` in the per-type table; the worst-case variant instead
/// requires every spoof record to be tagged.
pub fn full_report(preds: &PredictionSet, threshold: f64, variant: ApcerVariant) -> Result<MetricsReport> {
    let pooled = apcer(preds, threshold)?;
    let bpcer = bpcer(preds, threshold)?;
    let auc = auc(preds)?;
    let acc = acc(preds, threshold)?;
    let eer = eer(preds)?;

    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in preds.records().iter().filter(|r| r.label == Label::Spoof) {
        let tag = r.attack_type.clone().unwrap_or_else(|| UNKNOWN_TAG.to_string());
        let e = tally.entry(tag).or_default();
        e.1 += 1;
        if classify(r.score, threshold) == Label::Live {
            e.0 += 1;
        }
    }
    let per_attack_apcer: BTreeMap<String, f64> = tally
        .iter()
        .map(|(k, &(a, n))| (k.clone(), a as f64 / n as f64))
        .collect();
    let per_attack_count = tally.iter().map(|(k, &(_, n))| (k.clone(), n)).collect();

    let apcer_worst = match variant {
        ApcerVariant::WorstCase => apcer_worst_case(preds, threshold)?,
        ApcerVariant::Average => per_attack_apcer.values().copied().fold(0.0, f64::max),
    };
    let headline = match variant {
        ApcerVariant::Average => pooled,
        ApcerVariant::WorstCase => apcer_worst,
    };
    Ok(MetricsReport {
        apcer_variant: variant,
        apcer: headline,
        apcer_worst,
        bpcer,
        acer: acer(headline, bpcer),
        auc,
        acc,
        eer: eer.rate,
        eer_threshold: eer.threshold,
        threshold,
        n_live: preds.count(Label::Live),
        n_spoof: preds.count(Label::Spoof),
        per_attack_apcer,
        per_attack_count,
    })
}
