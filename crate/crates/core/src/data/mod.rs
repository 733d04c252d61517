//! Dataset ingestion: manifests, frame sampling, face cropping,
//! normalization statistics and class-distribution reports.

mod manifest;
mod sample;
mod stats;
mod transform;

pub use manifest::{
    read_manifest, write_manifest, ClassDistribution, Dataset, DatasetManifest, SampleRecord, UNKNOWN_TAG,
};
pub use sample::{check_label_tag, BBox, Label, Sample, Split, LIVE_TAG};
pub use stats::{compute_stats, denormalize, normalize, NormalizationStats, STD_FLOOR};
pub use transform::{crop_resize, list_frames, sample_frames};
