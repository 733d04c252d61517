use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ops::{AugmentationOp, LabelEffect, OpKind};
use super::params::FasAugParams;
use crate::data::{Label, Sample};
use crate::error::{Error, Result};
use crate::image::{Image, CHANNELS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraditionalAug {
    pub enabled: bool,
    /// Rotation angle is drawn from `[-rotation_degrees, rotation_degrees]`.
    pub rotation_degrees: f64,
    /// Per-channel multiplicative factor ranges (R, G, B).
    pub color_jitter: [[f64; 2]; 3],
}

impl Default for TraditionalAug {
    fn default() -> Self {
        Self {
            enabled: true,
            rotation_degrees: 10.0,
            color_jitter: [[0.9, 1.1]; 3],
        }
    }
}

impl TraditionalAug {
    pub fn identity() -> Self {
        Self {
            enabled: true,
            rotation_degrees: 0.0,
            color_jitter: [[1.0, 1.0]; 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugPolicy {
    pub fas_aug_probability: f64,
    pub traditional: TraditionalAug,
    pub seed: u64,
    /// Inline operator ranges; replaced by `operators_file` when that is set.
    pub operators: FasAugParams,
    pub operators_file: Option<PathBuf>,
}

impl Default for AugPolicy {
    fn default() -> Self {
        Self {
            fas_aug_probability: 0.2,
            traditional: TraditionalAug::default(),
            seed: 0,
            operators: FasAugParams::default(),
            operators_file: None,
        }
    }
}

impl AugPolicy {
    pub fn disabled() -> Self {
        Self {
            fas_aug_probability: 0.0,
            traditional: TraditionalAug {
                enabled: false,
                ..TraditionalAug::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fas_aug_probability) {
            return Err(Error::config(
                "augment.fas_aug_probability",
                format!("{} is not a probability", self.fas_aug_probability),
            ));
        }
        let t = &self.traditional;
        if !(t.rotation_degrees.is_finite() && (0.0..=180.0).contains(&t.rotation_degrees)) {
            return Err(Error::config(
                "augment.traditional.rotation_degrees",
                "must lie in [0, 180]",
            ));
        }
        for r in &t.color_jitter {
            if !(r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                return Err(Error::config(
                    "augment.traditional.color_jitter",
                    "each range must satisfy 0 < low <= high",
                ));
            }
        }
        self.operators.validate()
    }

    /// Loads `operators_file` (if any) into `operators`.
    pub fn resolve_operators(&mut self) -> Result<()> {
        if let Some(path) = &self.operators_file {
            self.operators = FasAugParams::load(path)?;
        }
        Ok(())
    }
}

/// Applies FAS-Aug and reports which operator fired, if any.
///
/// The firing draw is always taken first so that the remainder of the
/// stream does not depend on the probability value.
pub fn apply_fas_aug_traced<R: Rng + ?Sized>(
    sample: Sample,
    policy: &AugPolicy,
    rng: &mut R,
) -> (Sample, Option<OpKind>) {
    let u: f64 = rng.random();
    if u >= policy.fas_aug_probability {
        return (sample, None);
    }
    let kind = OpKind::ALL[rng.random_range(0..OpKind::ALL.len())];
    let op = AugmentationOp::sample(kind, &policy.operators, rng);
    let mut out = sample;
    out.image = op.apply(&out.image);
    if op.label_effect() == LabelEffect::ForceSpoof && out.label == Label::Live {
        out.label = Label::Spoof;
        out.attack_type = kind.name().to_string();
    }
    (out, Some(kind))
}

pub fn apply_fas_aug<R: Rng + ?Sized>(sample: Sample, policy: &AugPolicy, rng: &mut R) -> Sample {
    apply_fas_aug_traced(sample, policy, rng).0
}

fn reflect(v: f64, n: usize) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let max = (n - 1) as f64;
    let period = 2.0 * max;
    let m = v.rem_euclid(period);
    if m > max {
        period - m
    } else {
        m
    }
}

/// Rotation about the image center with reflect padding and bilinear sampling.
pub fn rotate(image: &Image, degrees: f64) -> Image {
    if degrees == 0.0 {
        return image.clone();
    }
    let (h, w) = (image.height(), image.width());
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let (s, c) = degrees.to_radians().sin_cos();
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            let (dy, dx) = (y as f64 - cy, x as f64 - cx);
            let sy = reflect(cy + c * dy - s * dx, h);
            let sx = reflect(cx + s * dy + c * dx, w);
            for ch in 0..CHANNELS {
                out.set(y, x, ch, image.sample_bilinear(sy, sx, ch));
            }
        }
    }
    out
}

/// Random rotation followed by per-channel color jitter. Labels are untouched.
pub fn traditional_augment<R: Rng + ?Sized>(image: &Image, policy: &TraditionalAug, rng: &mut R) -> Image {
    if !policy.enabled {
        return image.clone();
    }
    let deg = if policy.rotation_degrees > 0.0 {
        rng.random_range(-policy.rotation_degrees..=policy.rotation_degrees)
    } else {
        0.0
    };
    let mut gains = [1.0f64; 3];
    for (g, r) in gains.iter_mut().zip(&policy.color_jitter) {
        *g = if r[0] == r[1] {
            r[0]
        } else {
            rng.random_range(r[0]..=r[1])
        };
    }
    let mut out = rotate(image, deg);
    if gains != [1.0; 3] {
        for px in out.data_mut().chunks_exact_mut(CHANNELS) {
            for c in 0..CHANNELS {
                px[c] = (px[c] as f64 * gains[c]) as f32;
            }
        }
    }
    out.clamp_unit()
}

/// The full per-sample training transform: traditional, then FAS-Aug.
pub fn augment_sample<R: Rng + ?Sized>(sample: Sample, policy: &AugPolicy, rng: &mut R) -> Sample {
    let mut sample = sample;
    sample.image = traditional_augment(&sample.image, &policy.traditional, rng);
    apply_fas_aug(sample, policy, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn live(img: Image) -> Sample {
        Sample::new(img, Label::Live, "Live", "s").unwrap()
    }

    fn textured() -> Image {
        Image::from_fn(16, 20, |y, x, c| ((y * 7 + x * 3 + c * 5) % 11) as f32 / 10.0)
    }

    #[test]
    fn probability_zero_is_bitwise_identity() {
        let policy = AugPolicy {
            fas_aug_probability: 0.0,
            ..Default::default()
        };
        let s = live(textured());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(apply_fas_aug(s.clone(), &policy, &mut rng), s);
        }
    }

    #[test]
    fn label_rewrite_follows_effect() {
        let policy = AugPolicy {
            fas_aug_probability: 1.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..400 {
            let (out, kind) = apply_fas_aug_traced(live(textured()), &policy, &mut rng);
            let kind = kind.unwrap();
            match kind.label_effect() {
                LabelEffect::Preserve => assert_eq!((out.label, out.attack_type.as_str()), (Label::Live, "Live")),
                LabelEffect::ForceSpoof => {
                    assert_eq!((out.label, out.attack_type.as_str()), (Label::Spoof, kind.name()))
                }
            }
            let spoof = Sample::new(textured(), Label::Spoof, "Print", "s").unwrap();
            let (out, _) = apply_fas_aug_traced(spoof, &policy, &mut rng);
            assert_eq!((out.label, out.attack_type.as_str()), (Label::Spoof, "Print"));
        }
    }

    #[test]
    fn identity_traditional() {
        let img = textured();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(traditional_augment(&img, &TraditionalAug::identity(), &mut rng), img);
    }

    #[test]
    fn rotation_by_full_turn_and_reflect() {
        assert_eq!(reflect(-1.0, 5), 1.0);
        assert_eq!(reflect(5.0, 5), 3.0);
        assert_eq!(reflect(2.5, 5), 2.5);
        let img = textured();
        let r = rotate(&img, 360.0);
        let err = img
            .data()
            .iter()
            .zip(r.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(err < 1e-4);
        // constant image stays constant under any rotation with reflect padding
        let flat = rotate(&Image::filled(9, 13, 0.3), 7.0);
        assert!(flat.data().iter().all(|&v| (v - 0.3).abs() < 1e-6));
    }

    #[test]
    fn invalid_policy_names_field() {
        let p = AugPolicy {
            fas_aug_probability: 1.5,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config { field, .. }) if field == "augment.fas_aug_probability"));
    }
}
