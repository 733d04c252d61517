use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::Dataset;
use super::sample::Split;
use crate::error::{Error, Result};
use crate::image::{Image, CHANNELS};

/// Smallest standard deviation allowed; degenerate channels are floored.
pub const STD_FLOOR: f64 = 1e-6;

/// Per-channel mean and standard deviation of the training pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl NormalizationStats {
    /// Leaves pixels unchanged.
    pub fn identity() -> Self {
        Self {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.std.iter().any(|&s| !(s.is_finite() && s > 0.0)) || self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::config(
                "data.stats",
                "standard deviations must be positive and finite",
            ));
        }
        Ok(())
    }

    /// Writes the six values in fixed order: mean r g b, std r g b.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = format!(
            "# mean_r mean_g mean_b std_r std_g std_b\n{} {} {} {} {} {}\n",
            self.mean[0], self.mean[1], self.mean[2], self.std[0], self.std[1], self.std[2]
        );
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = Vec::with_capacity(6);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("`{tok}` is not a number"),
                })?);
            }
        }
        if values.len() != 6 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!("expected 6 values, found {}", values.len()),
            });
        }
        let stats = Self {
            mean: [values[0], values[1], values[2]],
            std: [values[3], values[4], values[5]],
        };
        stats.validate()?;
        Ok(stats)
    }
}

/// Streaming per-channel mean/variance (Welford).
#[derive(Clone, Debug, Default)]
struct Moments {
    n: u64,
    mean: [f64; 3],
    m2: [f64; 3],
}

impl Moments {
    fn push(&mut self, image: &Image) {
        for px in image.data().chunks_exact(CHANNELS) {
            self.n += 1;
            let n = self.n as f64;
            for (c, &v) in px.iter().enumerate() {
                let v = v as f64;
                let delta = v - self.mean[c];
                self.mean[c] += delta / n;
                self.m2[c] += delta * (v - self.mean[c]);
            }
        }
    }
}

/// Mean and population standard deviation of every training pixel.
pub fn compute_stats(train: &Dataset) -> Result<NormalizationStats> {
    if train.split != Split::Train {
        return Err(Error::config(
            "data.train_manifest",
            format!(
                "normalization statistics must come from the train split, got {}",
                train.split
            ),
        ));
    }
    if train.is_empty() {
        return Err(Error::config("data.train_manifest", "training split is empty"));
    }
    let mut m = Moments::default();
    for s in &train.samples {
        m.push(&s.image);
    }
    let std = std::array::from_fn(|c| {
        let s = (m.m2[c] / m.n as f64).sqrt();
        if s < STD_FLOOR {
            log::warn!("channel {c} has standard deviation {s:e}; flooring at {STD_FLOOR:e}");
            STD_FLOOR
        } else {
            s
        }
    });
    Ok(NormalizationStats { mean: m.mean, std })
}

/// `(pixel - mean) / std` per channel.
pub fn normalize(image: &Image, stats: &NormalizationStats) -> Image {
    let mut out = image.clone();
    for px in out.data_mut().chunks_exact_mut(CHANNELS) {
        for (c, v) in px.iter_mut().enumerate() {
            *v = ((*v as f64 - stats.mean[c]) / stats.std[c]) as f32;
        }
    }
    out
}

pub fn denormalize(image: &Image, stats: &NormalizationStats) -> Image {
    let mut out = image.clone();
    for px in out.data_mut().chunks_exact_mut(CHANNELS) {
        for (c, v) in px.iter_mut().enumerate() {
            *v = (*v as f64 * stats.std[c] + stats.mean[c]) as f32;
        }
    }
    out
}
