// Frozen outputs of the pixel operators, normalization and prediction on a
// fixed fixture. A mismatch means the numerical behavior changed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regpad::augment::{traditional_augment, AugmentationOp, FasAugParams, OpKind, TraditionalAug};
use regpad::data::{normalize, NormalizationStats};
use regpad::image::Image;
use regpad::rng::{stream, Purpose};
use regpad::synthetic::smooth_field;
use regpad::vit::{live_probability, ModelConfig, VisionTransformer};

fn fixture() -> Image {
    let base = smooth_field(40, &mut ChaCha8Rng::seed_from_u64(1));
    Image::from_fn(40, 40, |y, x, c| {
        base.get(y, x, c) * 0.8 + ((x * 7 + y * 3 + c) % 5) as f32 * 0.05
    })
}

fn fnv1a(image: &Image) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in image.data() {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

const OPERATOR_GOLDENS: [u64; 8] = [
    0xb75d2cbf49b37958,
    0x141949e572b1cf9d,
    0x877577422f031500,
    0xa89c59db7f240daf,
    0xc0df5629e95cae25,
    0x154beca8f3021c18,
    0xf516e88201c0c086,
    0xa1c1bd0bad1fa665,
];
const TRADITIONAL_GOLDEN: u64 = 0x4b3a6ced9e0c246f;
const NORMALIZE_GOLDEN: u64 = 0xb3822692b8e28b55;
const PREDICT_GOLDEN: f64 = 0.49104225375160704;

#[test]
fn operator_goldens() {
    let img = fixture();
    let got: Vec<u64> = OpKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let op = AugmentationOp::sample(
                kind,
                &FasAugParams::default(),
                &mut stream(7, Purpose::Augment, 0, i as u64),
            );
            fnv1a(&op.apply(&img))
        })
        .collect();
    assert_eq!(got, OPERATOR_GOLDENS, "got {got:#x?}");
}

#[test]
fn traditional_golden() {
    let out = traditional_augment(
        &fixture(),
        &TraditionalAug::default(),
        &mut stream(7, Purpose::Augment, 1, 0),
    );
    assert_eq!(fnv1a(&out), TRADITIONAL_GOLDEN, "got {:#x}", fnv1a(&out));
}

#[test]
fn normalize_golden() {
    let stats = NormalizationStats {
        mean: [0.485, 0.456, 0.406],
        std: [0.229, 0.224, 0.225],
    };
    let out = normalize(&fixture(), &stats);
    assert_eq!(fnv1a(&out), NORMALIZE_GOLDEN, "got {:#x}", fnv1a(&out));
}

#[test]
fn predict_golden() {
    let cfg = ModelConfig {
        image_size: 28,
        embed_dim: 32,
        depth: 2,
        ..ModelConfig::toy()
    };
    let model = VisionTransformer::init(cfg, &mut stream(7, Purpose::Init, 0, 0)).unwrap();
    let face = fixture().resize_bilinear(28, 28);
    let p = live_probability(&model.forward(&face, false).unwrap().logits);
    assert!((p - PREDICT_GOLDEN).abs() < 1e-12, "got {p:?}");
}
