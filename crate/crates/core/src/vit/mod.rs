//! Register-token vision transformer with a linear live/spoof head.

mod archive;
mod config;
mod diagnostics;
mod model;
mod params;

pub use archive::{load_external_weights, save_checkpoint, sidecar_path, Checkpoint, Sidecar, WeightArchive};
pub use config::{ModelConfig, TokenLayout};
pub use diagnostics::{token_norm_report, TokenKind, TokenNorm, TokenNormReport, DEFAULT_IQR_FACTOR};
pub use model::{live_probability, patchify, AttentionRecord, ForwardOutput, Logits, Trace, VisionTransformer};
pub use params::{BlockParams, LayerNorm, Linear, ParamGroup, TensorMut, TensorRef, VitParams};
