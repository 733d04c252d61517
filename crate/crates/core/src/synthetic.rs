//! Synthetic live/spoof data for toy-scale runs.
//!
//! Live images are smooth random color fields with additive sensor noise.
//! Spoof images are drawn the same way and then re-rendered through a
//! halftone or moiré operator, tagged with that operator's name.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::augment::{AugmentationOp, FasAugParams, OpKind};
use crate::data::{write_manifest, Dataset, Label, Sample, SampleRecord, Split, LIVE_TAG};
use crate::error::Result;
use crate::image::Image;
use crate::rng::{stream, Purpose};

/// Operators used to render synthetic spoofs.
pub const SPOOF_OPERATORS: [OpKind; 3] = [OpKind::SfcHalftone, OpKind::BnHalftone, OpKind::MoirePattern];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_live: usize,
    pub n_spoof: usize,
    pub image_size: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn balanced(n: usize, image_size: usize, seed: u64) -> Self {
        Self {
            n_live: n / 2,
            n_spoof: n - n / 2,
            image_size,
            noise_std: 0.01,
            seed,
        }
    }
}

/// A smooth color field: per-channel offset plus a linear ramp.
pub fn smooth_field<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Image {
    let mut coef = [[0.0f64; 3]; 3];
    for c in &mut coef {
        *c = [
            rng.random_range(0.25..0.75),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
        ];
    }
    let n = size as f64;
    Image::from_fn(size, size, |y, x, c| {
        let (u, v) = (x as f64 / n - 0.5, y as f64 / n - 0.5);
        let [a, gx, gy] = coef[c];
        (a + gx * u + gy * v) as f32
    })
    .clamp_unit()
}

pub fn add_noise<R: Rng + ?Sized>(image: &Image, std: f64, rng: &mut R) -> Image {
    if std <= 0.0 {
        return image.clone();
    }
    let normal = Normal::new(0.0, std).expect("positive std");
    image.map(|v| v + normal.sample(rng) as f32).clamp_unit()
}

/// Sample `index` of the stream defined by `seed`; spoof samples use one of
/// [`SPOOF_OPERATORS`] with parameters drawn from the default ranges.
pub fn synthetic_sample(label: Label, index: u64, image_size: usize, noise_std: f64, seed: u64) -> Sample {
    let mut rng = stream(seed, Purpose::Synthetic, label.index() as u64, index);
    let live = add_noise(&smooth_field(image_size, &mut rng), noise_std, &mut rng);
    let source = format!("synthetic-{}-{index}", label);
    match label {
        Label::Live => Sample::new(live, Label::Live, LIVE_TAG, source).expect("consistent"),
        Label::Spoof => {
            let kind = SPOOF_OPERATORS[rng.random_range(0..SPOOF_OPERATORS.len())];
            let op = AugmentationOp::sample(kind, &FasAugParams::default(), &mut rng);
            Sample::new(op.apply(&live), Label::Spoof, kind.name(), source).expect("consistent")
        }
    }
}

pub fn synthetic_dataset(split: Split, spec: &SyntheticSpec) -> Dataset {
    let salt = match split {
        Split::Train => 0,
        Split::Val => 1 << 40,
        Split::Test => 2 << 40,
    };
    let mut samples = Vec::with_capacity(spec.n_live + spec.n_spoof);
    for i in 0..spec.n_live.max(spec.n_spoof) {
        if i < spec.n_live {
            samples.push(synthetic_sample(
                Label::Live,
                salt + i as u64,
                spec.image_size,
                spec.noise_std,
                spec.seed,
            ));
        }
        if i < spec.n_spoof {
            samples.push(synthetic_sample(
                Label::Spoof,
                salt + i as u64,
                spec.image_size,
                spec.noise_std,
                spec.seed,
            ));
        }
    }
    Dataset::new(split, samples)
}

/// Writes every sample as `<dir>/<split>/<i>.png` and lists them all in
/// `<dir>/manifest.csv`, whose path is returned.
pub fn export_datasets(dir: &Path, sets: &[&Dataset]) -> Result<PathBuf> {
    let mut records = Vec::new();
    for set in sets {
        let sub = dir.join(set.split.to_string());
        std::fs::create_dir_all(&sub).map_err(|e| crate::Error::io(&sub, e))?;
        for (i, s) in set.samples.iter().enumerate() {
            let rel = PathBuf::from(set.split.to_string()).join(format!("{i}.png"));
            s.image.save_png(&dir.join(&rel))?;
            records.push(SampleRecord {
                path: rel,
                label: s.label,
                attack_type: s.attack_type.clone(),
                split: set.split,
                bbox: None,
                source_id: format!("{}-{i}", set.split),
            });
        }
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &records)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let spec = SyntheticSpec::balanced(10, 28, 5);
        let a = synthetic_dataset(Split::Train, &spec);
        let b = synthetic_dataset(Split::Train, &spec);
        assert_eq!(a.samples, b.samples);
        let dist = a.class_distribution();
        assert_eq!((dist.live, dist.spoof), (5, 5));
        let v = synthetic_dataset(Split::Val, &spec);
        assert_ne!(a.samples[0].image, v.samples[0].image);
        assert!(a
            .samples
            .iter()
            .filter(|s| s.label == Label::Spoof)
            .all(|s| SPOOF_OPERATORS.iter().any(|k| k.name() == s.attack_type)));
        assert!(a
            .samples
            .iter()
            .all(|s| s.image.data().iter().all(|v| (0.0..=1.0).contains(v))));
    }

    #[test]
    fn export_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec::balanced(4, 28, 1);
        let (a, b) = (
            synthetic_dataset(Split::Train, &spec),
            synthetic_dataset(Split::Val, &spec),
        );
        let manifest = export_datasets(dir.path(), &[&a, &b]).unwrap();
        let records = crate::data::read_manifest(&manifest).unwrap();
        assert_eq!(records.len(), 8);
        let back = records[1].load(28).unwrap();
        assert_eq!(
            (back.label, back.attack_type.as_str()),
            (a.samples[1].label, a.samples[1].attack_type.as_str())
        );
        let err = back
            .image
            .data()
            .iter()
            .zip(a.samples[1].image.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f32, f32::max);
        assert!(err <= 0.5 / 255.0 + 1e-6);
    }
}
