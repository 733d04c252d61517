// Presentation-attack detection metrics on a hand-built prediction set.

use regpad::data::Label;
use regpad::metrics::{self, full_report, ApcerVariant, Prediction, PredictionSet, DEFAULT_THRESHOLD};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let preds = PredictionSet::new(vec![
        Prediction::new(0.92, Label::Live),
        Prediction::new(0.81, Label::Live),
        Prediction::new(0.64, Label::Live),
        Prediction::new(0.41, Label::Live),
        Prediction::tagged(0.12, Label::Spoof, "Print"),
        Prediction::tagged(0.33, Label::Spoof, "Print"),
        Prediction::tagged(0.58, Label::Spoof, "Print"),
        Prediction::tagged(0.07, Label::Spoof, "Replay"),
        Prediction::tagged(0.22, Label::Spoof, "Replay"),
    ])?;

    let t = DEFAULT_THRESHOLD;
    let apcer = metrics::apcer(&preds, t)?;
    let bpcer = metrics::bpcer(&preds, t)?;
    println!(
        "APCER {apcer:.4}  BPCER {bpcer:.4}  ACER {:.4}",
        metrics::acer(apcer, bpcer)
    );
    println!("per attack: {:?}", metrics::apcer_per_attack(&preds, t)?);
    let eer = metrics::eer(&preds)?;
    println!(
        "EER {:.4} at threshold {:.2}, AUC {:.4}",
        eer.rate,
        eer.threshold,
        metrics::auc(&preds)?
    );

    for variant in [ApcerVariant::Average, ApcerVariant::WorstCase] {
        let report = full_report(&preds, t, variant)?;
        assert!(report.acer_identity_holds());
        println!("--\n{}", report.to_text());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("metrics example failed");
}
