use proptest::prelude::*;

use regpad::data::Label;
use regpad::metrics::{self, full_report, read_score_file, write_score_file, ApcerVariant, Prediction, PredictionSet};

fn set_strategy() -> impl Strategy<Value = PredictionSet> {
    prop::collection::vec((0u8..=20, any::<bool>(), 0u8..3), 2..40).prop_map(|items| {
        let mut records: Vec<Prediction> = items
            .into_iter()
            .map(|(s, live, tag)| {
                let score = s as f64 / 20.0;
                if live {
                    Prediction::new(score, Label::Live)
                } else {
                    Prediction::tagged(score, Label::Spoof, ["Print", "Replay", "Mask"][tag as usize])
                }
            })
            .collect();
        records.push(Prediction::new(0.5, Label::Live));
        records.push(Prediction::tagged(0.5, Label::Spoof, "Print"));
        PredictionSet::new(records).unwrap()
    })
}

fn negated(preds: &PredictionSet) -> PredictionSet {
    PredictionSet::new(
        preds
            .records()
            .iter()
            .map(|r| Prediction {
                score: 1.0 - r.score,
                ..r.clone()
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn report_fields_are_consistent(preds in set_strategy(), t in 0.0f64..=1.0) {
        for variant in [ApcerVariant::Average, ApcerVariant::WorstCase] {
            let r = full_report(&preds, t, variant).unwrap();
            prop_assert!(r.acer_identity_holds());
            prop_assert!(r.apcer_worst >= metrics::apcer(&preds, t).unwrap());
            for v in [r.apcer, r.apcer_worst, r.bpcer, r.acer, r.auc, r.acc, r.eer] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn error_rates_are_monotone_in_threshold(preds in set_strategy(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(metrics::apcer(&preds, hi).unwrap() <= metrics::apcer(&preds, lo).unwrap());
        prop_assert!(metrics::bpcer(&preds, hi).unwrap() >= metrics::bpcer(&preds, lo).unwrap());
    }

    #[test]
    fn auc_is_antisymmetric_under_score_reversal(preds in set_strategy()) {
        let a = metrics::auc(&preds).unwrap();
        let b = metrics::auc(&negated(&preds)).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eer_cut_minimizes_the_far_frr_gap(preds in set_strategy()) {
        let e = metrics::eer(&preds).unwrap();
        let gap = (e.far - e.frr).abs();
        for r in preds.records() {
            let t = r.score;
            let other = (metrics::apcer(&preds, t).unwrap() - metrics::bpcer(&preds, t).unwrap()).abs();
            prop_assert!(gap <= other + 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&e.rate));
    }

    #[test]
    fn score_file_round_trips(preds in set_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        write_score_file(&path, &preds).unwrap();
        let back = read_score_file(&path).unwrap();
        prop_assert_eq!(back.records(), preds.records());
    }
}

#[test]
fn metrics_need_both_classes() {
    let live_only = PredictionSet::new(vec![Prediction::new(0.7, Label::Live)]).unwrap();
    assert!(metrics::apcer(&live_only, 0.5).is_err());
    assert!(metrics::auc(&live_only).is_err());
    assert!(metrics::eer(&live_only).is_err());
    assert_eq!(metrics::bpcer(&live_only, 0.5).unwrap(), 0.0);
}
