use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architectural hyperparameters of the register-token transformer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub image_size: usize,
    pub patch_size: usize,
    pub embed_dim: usize,
    pub depth: usize,
    pub num_heads: usize,
    pub mlp_ratio: f64,
    pub num_register_tokens: usize,
    pub num_classes: usize,
    pub drop_rate: f64,
}

impl Default for ModelConfig {
    /// ViT-B/14 with four registers.
    fn default() -> Self {
        Self {
            image_size: 224,
            patch_size: 14,
            embed_dim: 768,
            depth: 12,
            num_heads: 12,
            mlp_ratio: 4.0,
            num_register_tokens: 4,
            num_classes: 2,
            drop_rate: 0.0,
        }
    }
}

impl ModelConfig {
    /// CPU-sized configuration used by tests and examples.
    pub fn toy() -> Self {
        Self {
            image_size: 56,
            patch_size: 14,
            embed_dim: 64,
            depth: 4,
            num_heads: 4,
            mlp_ratio: 4.0,
            num_register_tokens: 4,
            num_classes: 2,
            drop_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || self.image_size == 0 {
            return Err(Error::config(
                "model.patch_size",
                "image and patch size must be positive",
            ));
        }
        if !self.image_size.is_multiple_of(self.patch_size) {
            return Err(Error::config(
                "model.image_size",
                format!(
                    "{} is not a multiple of patch size {}",
                    self.image_size, self.patch_size
                ),
            ));
        }
        if self.num_heads == 0 || !self.embed_dim.is_multiple_of(self.num_heads) {
            return Err(Error::config(
                "model.num_heads",
                format!(
                    "embed_dim {} is not divisible by {} heads",
                    self.embed_dim, self.num_heads
                ),
            ));
        }
        if self.depth == 0 {
            return Err(Error::config("model.depth", "at least one encoder block is required"));
        }
        if self.num_classes != 2 {
            return Err(Error::config(
                "model.num_classes",
                "the classifier is binary (live, spoof)",
            ));
        }
        if !(0.0..=1.0).contains(&self.drop_rate) {
            return Err(Error::config("model.drop_rate", "must lie in [0, 1]"));
        }
        if self.mlp_ratio.is_nan() || self.mlp_ratio <= 0.0 || self.mlp_hidden() == 0 {
            return Err(Error::config("model.mlp_ratio", "must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> usize {
        self.image_size / self.patch_size
    }

    pub fn num_patches(&self) -> usize {
        self.grid() * self.grid()
    }

    pub fn patch_dim(&self) -> usize {
        self.patch_size * self.patch_size * crate::image::CHANNELS
    }

    pub fn head_dim(&self) -> usize {
        self.embed_dim / self.num_heads
    }

    pub fn mlp_hidden(&self) -> usize {
        (self.embed_dim as f64 * self.mlp_ratio).round() as usize
    }

    pub fn layout(&self) -> TokenLayout {
        TokenLayout::new(self.num_register_tokens, self.num_patches())
    }
}

/// Positions of the class, register and patch tokens in the sequence.
///
/// Order is `[class, register_1..register_R, patch_1..patch_N]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TokenLayout {
    pub n_class: usize,
    pub n_register: usize,
    pub n_patch: usize,
    pub total: usize,
}

impl TokenLayout {
    pub fn new(n_register: usize, n_patch: usize) -> Self {
        Self {
            n_class: 1,
            n_register,
            n_patch,
            total: 1 + n_register + n_patch,
        }
    }

    pub fn class_index(&self) -> usize {
        0
    }

    pub fn register_range(&self) -> std::ops::Range<usize> {
        self.n_class..self.n_class + self.n_register
    }

    pub fn patch_range(&self) -> std::ops::Range<usize> {
        self.n_class + self.n_register..self.total
    }
}
