//! Dataset manifests.
//!
//! One record per line, comma separated, in this exact field order:
//!
//! ```text
//! path, label, attack_type, split, bbox, source_id
//! ```
//!
//! `label` is `live` or `spoof`; `bbox` is `x;y;w;h` in source pixels or
//! empty; `source_id` names the originating video or subject and defaults to
//! the file stem when empty. Lines starting with `#` are comments. Relative
//! paths resolve against the manifest's directory.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use super::sample::{check_label_tag, BBox, Label, Sample, Split};
use super::stats::NormalizationStats;
use super::transform::crop_resize;
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub path: PathBuf,
    pub label: Label,
    pub attack_type: String,
    pub split: Split,
    pub bbox: Option<BBox>,
    pub source_id: String,
}

impl SampleRecord {
    /// Decodes the image, crops it to the bounding box (or the centered
    /// square when absent) and resizes to `out_size`.
    pub fn load(&self, out_size: usize) -> Result<Sample> {
        let frame = Image::open(&self.path)?;
        let image = crop_resize(&frame, self.bbox.as_ref(), out_size)?;
        Ok(Sample {
            image,
            label: self.label,
            attack_type: self.attack_type.clone(),
            source_id: self.source_id.clone(),
            bbox: self.bbox,
        })
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads every record of a manifest file, across all splits.
pub fn read_manifest(path: &Path) -> Result<Vec<SampleRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(file);
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_error(path, line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() != 6 {
            return Err(parse_error(
                path,
                line,
                format!(
                    "expected 6 fields (path, label, attack_type, split, bbox, source_id), found {}",
                    row.len()
                ),
            ));
        }
        let rel = PathBuf::from(&row[0]);
        if row[0].is_empty() {
            return Err(parse_error(path, line, "empty path"));
        }
        let label: Label = row[1].parse().map_err(|m: String| parse_error(path, line, m))?;
        let attack_type = row[2].to_string();
        check_label_tag(label, &attack_type).map_err(|m| parse_error(path, line, m))?;
        let split: Split = row[3].parse().map_err(|m: String| parse_error(path, line, m))?;
        let bbox = if row[4].is_empty() {
            None
        } else {
            let b: BBox = row[4].parse().map_err(|m: String| parse_error(path, line, m))?;
            Some(b)
        };
        let source_id = if row[5].is_empty() {
            rel.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        } else {
            row[5].to_string()
        };
        let full = if rel.is_absolute() { rel } else { base.join(rel) };
        records.push(SampleRecord {
            path: full,
            label,
            attack_type,
            split,
            bbox,
            source_id,
        });
    }
    Ok(records)
}

/// Writes records in manifest format. Paths are written as given.
pub fn write_manifest(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let mut out = String::from("# path, label, attack_type, split, bbox, source_id\n");
    for r in records {
        let bbox = r.bbox.map(|b| b.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{}, {}, {}, {}, {}, {}\n",
            r.path.display(),
            r.label,
            r.attack_type,
            r.split,
            bbox,
            r.source_id
        ));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// The records of one split.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub split: Split,
    pub records: Vec<SampleRecord>,
    pub stats: Option<NormalizationStats>,
}

impl DatasetManifest {
    pub fn from_records(split: Split, records: impl IntoIterator<Item = SampleRecord>) -> Result<Self> {
        let records: Vec<SampleRecord> = records.into_iter().filter(|r| r.split == split).collect();
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(&r.path) {
                return Err(Error::Ingestion(format!(
                    "duplicate record path {} in {split} split",
                    r.path.display()
                )));
            }
        }
        Ok(Self {
            split,
            records,
            stats: None,
        })
    }

    pub fn load(path: &Path, split: Split) -> Result<Self> {
        Self::from_records(split, read_manifest(path)?)
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Decodes every record into memory at `image_size`.
    pub fn load_samples(&self, image_size: usize) -> Result<Dataset> {
        let samples = self
            .records
            .iter()
            .map(|r| r.load(image_size))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            split: self.split,
            samples,
        })
    }

    pub fn class_distribution(&self) -> ClassDistribution {
        ClassDistribution::from_pairs(self.records.iter().map(|r| (r.label, r.attack_type.as_str())))
    }
}

/// In-memory samples of one split, pixels in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub split: Split,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(split: Split, samples: Vec<Sample>) -> Self {
        Self { split, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_distribution(&self) -> ClassDistribution {
        ClassDistribution::from_pairs(self.samples.iter().map(|s| (s.label, s.attack_type.as_str())))
    }
}

pub const UNKNOWN_TAG: &str = "Unknown";

/// Per-attack-type counts and the live:spoof balance.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassDistribution {
    pub per_attack: BTreeMap<String, usize>,
    pub live: usize,
    pub spoof: usize,
}

impl ClassDistribution {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (Label, &'a str)>) -> Self {
        let mut per_attack = BTreeMap::new();
        let (mut live, mut spoof) = (0, 0);
        for (label, tag) in pairs {
            match label {
                Label::Live => live += 1,
                Label::Spoof => spoof += 1,
            }
            let key = if tag.is_empty() { UNKNOWN_TAG } else { tag };
            *per_attack.entry(key.to_string()).or_insert(0) += 1;
        }
        Self {
            per_attack,
            live,
            spoof,
        }
    }

    pub fn total(&self) -> usize {
        self.live + self.spoof
    }

    /// Spoof samples per live sample; `None` when either class is absent.
    pub fn spoof_per_live(&self) -> Option<f64> {
        (self.live > 0 && self.spoof > 0).then(|| self.spoof as f64 / self.live as f64)
    }

    /// `live:spoof` reduced to lowest terms, or a note when degenerate.
    pub fn ratio_string(&self) -> String {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        if self.live == 0 || self.spoof == 0 {
            return format!("degenerate ({} live, {} spoof)", self.live, self.spoof);
        }
        let g = gcd(self.live, self.spoof);
        format!("{}:{}", self.live / g, self.spoof / g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("attack_type\tcount\n");
        for (tag, n) in &self.per_attack {
            out.push_str(&format!("{tag}\t{n}\n"));
        }
        out.push_str(&format!(
            "live\t{}\nspoof\t{}\nlive:spoof\t{}\n",
            self.live,
            self.spoof,
            self.ratio_string()
        ));
        out
    }
}
