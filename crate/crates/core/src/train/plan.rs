use serde::{Deserialize, Serialize};

use super::freeze::FreezePolicy;
use super::loss::LossKind;
use super::optim::OptimizerKind;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainPlan {
    pub loss: LossKind,
    pub optimizer: OptimizerKind,
    pub lr_head: f64,
    pub lr_backbone: f64,
    /// Floor of the cosine schedule.
    pub eta_min: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub freeze: FreezePolicy,
    /// Leading epochs during which every parameter is trainable, before
    /// `freeze` takes over. Early stopping and checkpoint selection start
    /// after these epochs.
    pub warmup_epochs: usize,
    pub seed: u64,
    /// Operating threshold for the monitored validation ACER.
    pub threshold: f64,
    /// Wall-clock timestamps in the training log. Disable for byte-identical
    /// logs across runs.
    pub log_timestamps: bool,
}

impl Default for TrainPlan {
    fn default() -> Self {
        Self {
            loss: LossKind::default(),
            optimizer: OptimizerKind::default(),
            lr_head: 5e-5,
            lr_backbone: 5e-6,
            eta_min: 0.0,
            batch_size: 32,
            max_epochs: 200,
            patience: 20,
            freeze: FreezePolicy::default(),
            warmup_epochs: 0,
            seed: 0,
            threshold: crate::metrics::DEFAULT_THRESHOLD,
            log_timestamps: true,
        }
    }
}

impl TrainPlan {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("train.lr_head", self.lr_head), ("train.lr_backbone", self.lr_backbone)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("{v} must be a positive number")));
            }
        }
        if self.lr_head < self.lr_backbone {
            log::warn!(
                "lr_head ({}) is below lr_backbone ({}); the head is normally tuned more aggressively",
                self.lr_head,
                self.lr_backbone
            );
        }
        if !(self.eta_min >= 0.0 && self.eta_min <= self.lr_head.min(self.lr_backbone)) {
            return Err(Error::config(
                "train.eta_min",
                "must lie in [0, min(lr_head, lr_backbone)]",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::config("train.batch_size", "must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("train.max_epochs", "must be at least 1"));
        }
        if self.patience >= self.max_epochs {
            return Err(Error::config(
                "train.patience",
                format!(
                    "patience ({}) must be below max_epochs ({})",
                    self.patience, self.max_epochs
                ),
            ));
        }
        if self.warmup_epochs >= self.max_epochs {
            return Err(Error::config("train.warmup_epochs", "must be below max_epochs"));
        }
        if let LossKind::Focal { gamma, class_weights } = self.loss {
            if !(gamma >= 0.0 && gamma.is_finite()) {
                return Err(Error::config("train.loss.gamma", "must be >= 0"));
            }
            if !class_weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
                return Err(Error::config("train.loss.class_weights", "weights must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config("train.threshold", "must lie in [0, 1]"));
        }
        self.optimizer.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TrainPlan::default().validate().unwrap();
    }

    #[test]
    fn patience_must_be_below_epochs() {
        let p = TrainPlan {
            patience: 10,
            max_epochs: 10,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config { field, .. }) if field == "train.patience"));
    }

    #[test]
    fn inverted_rates_only_warn() {
        let p = TrainPlan {
            lr_head: 1e-6,
            lr_backbone: 1e-5,
            ..Default::default()
        };
        p.validate().unwrap();
    }

    #[test]
    fn tagged_toml() {
        let p: TrainPlan = toml::from_str(
            "lr_head = 0.01\n[loss]\nkind = \"cross_entropy\"\n[optimizer]\nkind = \"nesterov_sgd\"\nmomentum = 0.8\n",
        )
        .unwrap();
        assert_eq!(p.loss, LossKind::CrossEntropy);
        assert_eq!(
            p.optimizer,
            OptimizerKind::NesterovSgd {
                momentum: 0.8,
                weight_decay: 0.0
            }
        );
        let back: TrainPlan = toml::from_str(&toml::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
