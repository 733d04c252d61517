// A short training run on synthetic live and halftone/moiré spoof images:
// full warm-up from random initialization, then only the last block and
// the head are updated.

use regpad::augment::AugPolicy;
use regpad::data::{compute_stats, Split};
use regpad::metrics::{full_report, ApcerVariant};
use regpad::rng::{stream, Purpose};
use regpad::synthetic::{synthetic_dataset, SyntheticSpec};
use regpad::train::{fit_with_log, predict_dataset, TrainPlan};
use regpad::vit::{ModelConfig, VisionTransformer};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 0;
    let cfg = ModelConfig::toy();
    let train = synthetic_dataset(Split::Train, &SyntheticSpec::balanced(240, cfg.image_size, seed));
    let val = synthetic_dataset(Split::Val, &SyntheticSpec::balanced(60, cfg.image_size, seed));
    let stats = compute_stats(&train)?;
    let model = VisionTransformer::init(cfg, &mut stream(seed, Purpose::Init, 0, 0))?;
    let plan = TrainPlan {
        lr_head: 2e-4,
        lr_backbone: 2e-4,
        batch_size: 4,
        max_epochs: 12,
        warmup_epochs: 8,
        patience: 11,
        seed,
        log_timestamps: false,
        ..TrainPlan::default()
    };
    let outcome = fit_with_log(model, &train, &val, &stats, &plan, &AugPolicy::disabled(), &mut |r| {
        if r.split == "val" {
            println!(
                "epoch {} {:?}: val loss {:.4} ACER {:.4} AUC {:.4}",
                r.epoch,
                r.phase,
                r.loss,
                r.acer.unwrap_or(f64::NAN),
                r.auc.unwrap_or(f64::NAN)
            );
        }
        Ok(())
    })?;
    println!(
        "best epoch {} with val ACER {:.4}",
        outcome.best_epoch, outcome.best_metric
    );
    let preds = predict_dataset(&outcome.best, &val, &stats)?;
    print!(
        "{}",
        full_report(&preds, plan.threshold, ApcerVariant::Average)?.to_text()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("training example failed");
}
