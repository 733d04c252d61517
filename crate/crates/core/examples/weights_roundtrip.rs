// Saving a checkpoint, loading it back, and loading external weights into
// a model with a different register count.

use regpad::image::Image;
use regpad::rng::{stream, Purpose};
use regpad::vit::{load_external_weights, save_checkpoint, Checkpoint, ModelConfig, VisionTransformer};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ModelConfig::toy();
    let model = VisionTransformer::init(cfg.clone(), &mut stream(5, Purpose::Init, 0, 0))?;
    println!("toy model with {} parameters", model.params.num_parameters());

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.safetensors");
    save_checkpoint(&model, None, &path)?;
    let back = Checkpoint::load(&path)?;
    assert_eq!(back.model.params, model.params);

    let image = Image::filled(cfg.image_size, cfg.image_size, 0.4);
    let a = model.forward(&image, false)?.logits;
    let b = back.model.forward(&image, false)?.logits;
    println!(
        "logits before {:?}, after reload {:?}",
        [a.live(), a.spoof()],
        [b.live(), b.spoof()]
    );

    let other = ModelConfig {
        num_register_tokens: 2,
        ..cfg
    };
    match load_external_weights(&path, &other) {
        Ok(_) => println!("unexpectedly loaded"),
        Err(e) => println!("loading into a 2-register model fails: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("weights example failed");
}
