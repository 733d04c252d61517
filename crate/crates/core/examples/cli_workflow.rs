// The command pipeline on files: export a dataset, train from a config,
// evaluate the best checkpoint and score one image.

use regpad::cli::{cmd_evaluate, cmd_predict, cmd_train, load_config, Overrides, BEST_CHECKPOINT};
use regpad::data::Split;
use regpad::metrics::ApcerVariant;
use regpad::synthetic::{export_datasets, synthetic_dataset, SyntheticSpec};

const CONFIG: &str = r#"
seed = 3
output_dir = "run"

[model]
image_size = 28
patch_size = 14
embed_dim = 16
depth = 2
num_heads = 2

[train]
lr_head = 2e-4
lr_backbone = 2e-4
batch_size = 4
max_epochs = 3
patience = 2
warmup_epochs = 1

[augment]
fas_aug_probability = 0.2

[data]
train_manifest = "data/manifest.csv"
val_manifest = "data/manifest.csv"
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let train = synthetic_dataset(Split::Train, &SyntheticSpec::balanced(24, 28, 3));
    let val = synthetic_dataset(Split::Val, &SyntheticSpec::balanced(12, 28, 3));
    let test = synthetic_dataset(Split::Test, &SyntheticSpec::balanced(12, 28, 3));
    let manifest = export_datasets(&dir.path().join("data"), &[&train, &val, &test])?;

    let config_path = dir.path().join("run.cfg");
    std::fs::write(&config_path, CONFIG)?;
    let cfg = load_config(&config_path, &Overrides::default())?;
    let summary = cmd_train(&cfg)?;
    println!(
        "trained {} epochs, best epoch {} (val ACER {:.3})",
        summary.epochs_run, summary.best_epoch, summary.best_val_acer
    );

    let checkpoint = summary.output_dir.join(BEST_CHECKPOINT);
    let report = cmd_evaluate(
        &checkpoint,
        &manifest,
        0.5,
        ApcerVariant::WorstCase,
        &dir.path().join("eval"),
    )?;
    print!("{}", report.to_text());
    let score = cmd_predict(&checkpoint, &dir.path().join("data/test/0.png"))?;
    println!("live probability of test/0.png: {score:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cli example failed");
}
