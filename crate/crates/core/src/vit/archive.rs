//! Weight archives and checkpoints.
//!
//! Tensors are stored in a safetensors container under the dotted names
//! produced by [`VitParams::tensors`]. Model tensors are written as
//! little-endian `f64`, so a save/load round trip is bit-exact; `f32` archives
//! are accepted on load and widened. A JSON sidecar at `<archive>.json`
//! records the originating [`ModelConfig`] and, for checkpoints, the
//! normalization statistics the model was trained with.
//!
//! Weights follow the `in × out` convention; archives converted from
//! frameworks that store `out × in` must be transposed first.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use safetensors::tensor::{Dtype, SafeTensors, TensorView};
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::VisionTransformer;
use super::params::VitParams;
use crate::data::NormalizationStats;
use crate::error::{Error, Result};

const SIDECAR_FORMAT: &str = "regpad-weights/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationStats>,
}

pub fn sidecar_path(archive: &Path) -> PathBuf {
    let mut name = archive.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Flat name → (shape, values) container.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightArchive {
    pub tensors: BTreeMap<String, (Vec<usize>, Vec<f64>)>,
}

impl WeightArchive {
    pub fn from_params(params: &VitParams) -> Self {
        let tensors = params
            .tensors()
            .into_iter()
            .map(|t| (t.name, (t.shape, t.data.to_vec())))
            .collect();
        Self { tensors }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let raw: Vec<(String, Vec<usize>, Vec<u8>)> = self
            .tensors
            .iter()
            .map(|(name, (shape, data))| {
                let bytes = data.iter().flat_map(|v| v.to_le_bytes()).collect();
                (name.clone(), shape.clone(), bytes)
            })
            .collect();
        let views = raw
            .iter()
            .map(|(name, shape, bytes)| {
                TensorView::new(Dtype::F64, shape.clone(), bytes)
                    .map(|v| (name.clone(), v))
                    .map_err(|e| Error::Archive(format!("{name}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        safetensors::serialize(views, &None::<HashMap<String, String>>).map_err(|e| Error::Archive(e.to_string()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let st = SafeTensors::deserialize(bytes).map_err(|e| Error::Archive(e.to_string()))?;
        let mut tensors = BTreeMap::new();
        for (name, view) in st.tensors() {
            let data: Vec<f64> = match view.dtype() {
                Dtype::F64 => view
                    .data()
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                    .collect(),
                Dtype::F32 => view
                    .data()
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
                    .collect(),
                other => return Err(Error::Archive(format!("{name}: unsupported dtype {other:?}"))),
            };
            tensors.insert(name, (view.shape().to_vec(), data));
        }
        Ok(Self { tensors })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    /// Assigns every tensor onto a parameter set shaped by `config`.
    /// All missing, unexpected and mis-shaped names are reported together.
    pub fn into_params(self, config: &ModelConfig) -> Result<VitParams> {
        config.validate()?;
        let mut params = VitParams::zeros(config);
        let mut remaining = self.tensors;
        let mut missing = Vec::new();
        let mut mismatched = Vec::new();
        let expected_shapes: Vec<Vec<usize>> = params.tensors().into_iter().map(|t| t.shape).collect();
        for (slot, want) in params.tensors_mut().into_iter().zip(expected_shapes) {
            match remaining.remove(&slot.name) {
                None => missing.push(slot.name),
                Some((shape, data)) if shape != want => {
                    mismatched.push(format!("{} {:?} != {:?}", slot.name, shape, want));
                    drop(data);
                }
                Some((_, data)) => slot.data.copy_from_slice(&data),
            }
        }
        let unexpected: Vec<String> = remaining.into_keys().collect();
        if missing.is_empty() && unexpected.is_empty() && mismatched.is_empty() {
            Ok(params)
        } else {
            Err(Error::WeightLoad {
                missing,
                unexpected,
                mismatched,
            })
        }
    }
}

/// Loads an externally supplied archive onto the shapes implied by `config`.
pub fn load_external_weights(path: &Path, config: &ModelConfig) -> Result<VitParams> {
    WeightArchive::read(path)?.into_params(config)
}

/// Writes the archive and its sidecar descriptor.
pub fn save_checkpoint(
    model: &VisionTransformer,
    normalization: Option<&NormalizationStats>,
    path: &Path,
) -> Result<()> {
    WeightArchive::from_params(&model.params).write(path)?;
    let sidecar = Sidecar {
        format: SIDECAR_FORMAT.into(),
        model: model.config.clone(),
        normalization: normalization.cloned(),
    };
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    std::fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub model: VisionTransformer,
    pub normalization: Option<NormalizationStats>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let side = sidecar_path(path);
        let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: side.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if sidecar.format != SIDECAR_FORMAT {
            return Err(Error::Archive(format!(
                "{}: unknown format `{}`",
                side.display(),
                sidecar.format
            )));
        }
        let params = load_external_weights(path, &sidecar.model)?;
        Ok(Self {
            model: VisionTransformer::new(sidecar.model, params)?,
            normalization: sidecar.normalization,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = ModelConfig::toy();
        let params = VitParams::init(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let bytes = WeightArchive::from_params(&params).to_bytes().unwrap();
        let back = WeightArchive::from_bytes(&bytes).unwrap().into_params(&cfg).unwrap();
        for (a, b) in params.tensors().iter().zip(back.tensors()) {
            assert_eq!(a.name, b.name);
            assert!(a.data.iter().zip(b.data).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn missing_head_is_named() {
        let cfg = ModelConfig::toy();
        let params = VitParams::init(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let mut archive = WeightArchive::from_params(&params);
        archive.tensors.remove("head.weight");
        archive.tensors.remove("head.bias");
        archive.tensors.insert("extra".into(), (vec![1], vec![0.0]));
        match archive.into_params(&cfg) {
            Err(Error::WeightLoad {
                missing, unexpected, ..
            }) => {
                assert_eq!(missing, vec!["head.weight".to_string(), "head.bias".to_string()]);
                assert_eq!(unexpected, vec!["extra".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn register_count_mismatch_is_a_shape_error() {
        let without = ModelConfig {
            num_register_tokens: 0,
            ..ModelConfig::toy()
        };
        let params = VitParams::init(&without, &mut ChaCha8Rng::seed_from_u64(5));
        let archive = WeightArchive::from_params(&params);
        match archive.into_params(&ModelConfig::toy()) {
            Err(Error::WeightLoad {
                missing, mismatched, ..
            }) => {
                assert!(missing.is_empty());
                assert_eq!(mismatched.len(), 1);
                assert!(mismatched[0].starts_with("register_tokens"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn f32_archives_are_widened() {
        let mut st_bytes = Vec::new();
        let values = [1.5f32, -2.0];
        for v in values {
            st_bytes.extend_from_slice(&v.to_le_bytes());
        }
        let view = TensorView::new(Dtype::F32, vec![2], &st_bytes).unwrap();
        let bytes = safetensors::serialize(vec![("x", view)], &None).unwrap();
        let archive = WeightArchive::from_bytes(&bytes).unwrap();
        assert_eq!(archive.tensors["x"], (vec![2], vec![1.5, -2.0]));
    }
}
