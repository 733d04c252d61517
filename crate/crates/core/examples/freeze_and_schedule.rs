// Freeze policies, the cosine learning-rate schedule and early stopping.

use regpad::train::{apply_freeze, cosine_lr, BlockSet, EarlyStopState, FreezePolicy, LrSchedule};
use regpad::vit::{ModelConfig, VitParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = VitParams::zeros(&ModelConfig {
        embed_dim: 32,
        num_heads: 4,
        ..ModelConfig::default()
    });
    for spec in ["12", "10-12", "all", "last"] {
        let policy = FreezePolicy::blocks(spec.parse::<BlockSet>()?);
        let part = apply_freeze(&params, &policy)?;
        println!(
            "trainable blocks {spec:>6}: {} trainable, {} frozen tensors",
            part.trainable.len(),
            part.frozen.len()
        );
    }
    let full = apply_freeze(&params, &FreezePolicy::full())?;
    println!("full unfreeze: {} frozen tensors", full.frozen.len());

    let schedule = LrSchedule::new(5e-5, 0.0, 100)?;
    for step in [0, 25, 50, 75, 100] {
        println!("step {step:>3}: lr {:.3e}", cosine_lr(step, &schedule)?);
    }

    let mut stop = EarlyStopState::monitoring("val_acer", 3);
    for (epoch, acer) in [0.30, 0.21, 0.22, 0.21, 0.25].into_iter().enumerate() {
        let d = stop.observe(epoch + 1, acer);
        println!(
            "epoch {} acer {acer:.2} improved {} stop {}",
            epoch + 1,
            d.improved,
            d.stop
        );
        if d.stop {
            break;
        }
    }
    println!("best epoch {:?} with {}", stop.best_epoch, stop.best_metric);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("freeze example failed");
}
