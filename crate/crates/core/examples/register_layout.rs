// Token layout of the register transformer and the token-norm diagnostic.

use regpad::image::Image;
use regpad::rng::{stream, Purpose};
use regpad::vit::{token_norm_report, ModelConfig, TokenKind, VisionTransformer, DEFAULT_IQR_FACTOR};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for r in [0, 4] {
        let cfg = ModelConfig {
            num_register_tokens: r,
            ..ModelConfig::default()
        };
        cfg.validate()?;
        let layout = cfg.layout();
        println!(
            "224/14 with {r} registers: {} patches, sequence length {}",
            cfg.num_patches(),
            layout.total
        );
    }

    let cfg = ModelConfig::toy();
    let model = VisionTransformer::init(cfg.clone(), &mut stream(3, Purpose::Init, 0, 0))?;
    let image = Image::from_fn(cfg.image_size, cfg.image_size, |y, x, c| {
        ((x * 5 + y * 3 + c * 7) % 17) as f32 / 16.0
    });
    let out = model.forward(&image, true)?;

    let worst = out
        .attention
        .iter()
        .flat_map(|a| {
            a.weights
                .rows()
                .into_iter()
                .map(|row| (row.sum() - 1.0).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0f64, f64::max);
    println!(
        "{} attention maps, max |row sum - 1| = {worst:.2e}",
        out.attention.len()
    );

    let report = token_norm_report(&out.final_tokens, &out.layout, DEFAULT_IQR_FACTOR);
    for kind in [TokenKind::Class, TokenKind::Register] {
        let norms: Vec<String> = report.of_kind(kind).map(|t| format!("{:.2}", t.norm)).collect();
        println!("{kind:?} token norms: {}", norms.join(" "));
    }
    println!(
        "patch norm median {:.2}, outlier threshold {:.2}, outlier rate {:.3}",
        report.patch_median, report.threshold, report.patch_outlier_rate
    );
    println!("live probability {:.4}", regpad::vit::live_probability(&out.logits));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("register layout example failed");
}
