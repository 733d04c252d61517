//! Run configuration: one TOML document with `[model]`, `[train]`,
//! `[augment]` and `[data]` sections. Omitted keys take their defaults.
//!
//! ```toml
//! seed = 7
//! output_dir = "runs/toy"
//!
//! [model]
//! image_size = 56
//! depth = 4
//! embed_dim = 64
//! num_heads = 4
//!
//! [train]
//! lr_head = 5e-5
//! lr_backbone = 5e-6
//! max_epochs = 200
//! patience = 20
//! loss = { kind = "focal", gamma = 2.0, class_weights = [1.0, 1.0] }
//! optimizer = { kind = "adamw", weight_decay = 0.01 }
//! freeze = { trainable_blocks = "last" }
//!
//! [augment]
//! fas_aug_probability = 0.0
//!
//! [data]
//! train_manifest = "train.csv"
//! val_manifest = "val.csv"
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::AugPolicy;
use crate::error::{Error, Result};
use crate::train::TrainPlan;
use crate::vit::ModelConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub train_manifest: Option<PathBuf>,
    pub val_manifest: Option<PathBuf>,
    pub test_manifest: Option<PathBuf>,
    /// Precomputed normalization statistics; computed from the training
    /// split when absent.
    pub stats: Option<PathBuf>,
    /// Frames drawn per video by `frames-extract`.
    pub frames_per_video: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            train_manifest: None,
            val_manifest: None,
            test_manifest: None,
            stats: None,
            frames_per_video: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Propagated to `train.seed` and `augment.seed` by [`RunConfig::resolve`].
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Starting weights; random initialization when absent.
    pub weights: Option<PathBuf>,
    pub model: ModelConfig,
    pub train: TrainPlan,
    pub augment: AugPolicy,
    pub data: DataConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("runs"),
            weights: None,
            model: ModelConfig::default(),
            train: TrainPlan::default(),
            augment: AugPolicy::default(),
            data: DataConfig::default(),
        }
    }
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

fn require_file(field: &str, p: &Option<PathBuf>) -> Result<()> {
    if let Some(path) = p {
        if !path.exists() {
            return Err(Error::config(field, format!("{} does not exist", path.display())));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Reads and resolves a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| Error::toml(path, &text, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base)?;
        Ok(cfg)
    }

    /// Propagates the seed, anchors relative paths at `base`, loads the
    /// operator parameter file and validates every section. Idempotent.
    pub fn resolve(&mut self, base: &Path) -> Result<()> {
        self.set_seed(self.seed);
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
        rebase(base, &mut self.weights);
        rebase(base, &mut self.augment.operators_file);
        let d = &mut self.data;
        for p in [
            &mut d.train_manifest,
            &mut d.val_manifest,
            &mut d.test_manifest,
            &mut d.stats,
        ] {
            rebase(base, p);
        }
        self.augment.resolve_operators()?;
        self.validate()
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
        self.augment.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        self.train.freeze.resolve(self.model.depth)?;
        self.augment.validate()?;
        require_file("weights", &self.weights)?;
        require_file("data.train_manifest", &self.data.train_manifest)?;
        require_file("data.val_manifest", &self.data.val_manifest)?;
        require_file("data.test_manifest", &self.data.test_manifest)?;
        require_file("data.stats", &self.data.stats)?;
        if self.data.frames_per_video == 0 {
            return Err(Error::config("data.frames_per_video", "must be at least 1"));
        }
        Ok(())
    }

    /// A manifest path that the current command needs.
    pub fn required(&self, field: &str) -> Result<&Path> {
        let p = match field {
            "data.train_manifest" => &self.data.train_manifest,
            "data.val_manifest" => &self.data.val_manifest,
            "data.test_manifest" => &self.data.test_manifest,
            other => return Err(Error::config(other, "unknown path field")),
        };
        p.as_deref()
            .ok_or_else(|| Error::config(field, "required by this command but not set"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::{BlockSet, LossKind};

    fn documented() -> String {
        include_str!("config.rs")
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start())
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn documented_example_parses() {
        let cfg = RunConfig::from_toml_str(&documented()).unwrap();
        assert_eq!(cfg.model.depth, 4);
        assert_eq!(cfg.train.freeze.trainable_blocks, BlockSet::Last);
        assert_eq!(
            cfg.train.loss,
            LossKind::Focal {
                gamma: 2.0,
                class_weights: [1.0, 1.0]
            }
        );
    }

    #[test]
    fn resolved_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["train.csv", "val.csv"] {
            std::fs::write(dir.path().join(name), "").unwrap();
        }
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, documented()).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!((cfg.train.seed, cfg.augment.seed), (7, 7));
        assert_eq!(
            cfg.data.train_manifest.as_deref(),
            Some(dir.path().join("train.csv").as_path())
        );
        let mut again = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        again.resolve(Path::new("/elsewhere")).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn missing_manifest_names_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "[data]\ntrain_manifest = \"nope.csv\"\n").unwrap();
        match RunConfig::load(&path) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "data.train_manifest"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "seed = 1\n\n[train]\nlr_headd = 0.1\n").unwrap();
        match RunConfig::load(&path) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("lr_headd"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
