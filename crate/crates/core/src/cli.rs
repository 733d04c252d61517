//! Library side of the `regpad` command line. Each `cmd_*` function is one
//! subcommand; the binary only parses arguments and reports errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::augment::{AugmentationOp, FasAugParams, OpKind};
use crate::config::RunConfig;
use crate::data::{
    compute_stats, crop_resize, list_frames, normalize, read_manifest, sample_frames, write_manifest,
    ClassDistribution, DatasetManifest, NormalizationStats, SampleRecord, Split,
};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::metrics::{full_report, write_score_file, ApcerVariant, MetricsReport, Prediction, PredictionSet};
use crate::rng::{stream, Purpose};
use crate::train::fit_with_log;
use crate::vit::{live_probability, load_external_weights, save_checkpoint, Checkpoint, VisionTransformer};

pub const TRAIN_LOG: &str = "train_log.jsonl";
pub const BEST_CHECKPOINT: &str = "best.safetensors";
pub const FINAL_CHECKPOINT: &str = "final.safetensors";
pub const RESOLVED_CONFIG: &str = "config.resolved.toml";
pub const STATS_FILE: &str = "stats.txt";

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub output_dir: PathBuf,
    pub best_epoch: usize,
    pub best_val_acer: f64,
    pub epochs_run: usize,
    pub stopped_early: bool,
}

/// `train`: fits a model and writes the best and final checkpoints, the
/// training log, the normalization statistics and the resolved config.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    config.validate()?;
    let train_set = DatasetManifest::load(config.required("data.train_manifest")?, Split::Train)?;
    let val_set = DatasetManifest::load(config.required("data.val_manifest")?, Split::Val)?;
    if train_set.is_empty() {
        return Err(Error::config("data.train_manifest", "no records in the train split"));
    }
    if val_set.is_empty() {
        return Err(Error::config("data.val_manifest", "no records in the val split"));
    }
    let size = config.model.image_size;
    let train = train_set.load_samples(size)?;
    let val = val_set.load_samples(size)?;

    let out = &config.output_dir;
    create_dir(out)?;
    let stats = match &config.data.stats {
        Some(p) => NormalizationStats::read(p)?,
        None => compute_stats(&train)?,
    };
    stats.write(&out.join(STATS_FILE))?;
    write_text(&out.join(RESOLVED_CONFIG), &config.to_toml_string())?;

    let model = match &config.weights {
        Some(p) => VisionTransformer::new(config.model.clone(), load_external_weights(p, &config.model)?)?,
        None => VisionTransformer::init(config.model.clone(), &mut stream(config.seed, Purpose::Init, 0, 0))?,
    };

    let log_path = out.join(TRAIN_LOG);
    let mut log = BufWriter::new(File::create(&log_path).map_err(|e| Error::io(&log_path, e))?);
    let outcome = fit_with_log(model, &train, &val, &stats, &config.train, &config.augment, &mut |r| {
        let line = serde_json::to_string(r).expect("log records serialize");
        writeln!(log, "{line}").map_err(|e| Error::io(&log_path, e))
    })?;
    log.flush().map_err(|e| Error::io(&log_path, e))?;

    save_checkpoint(&outcome.best, Some(&stats), &out.join(BEST_CHECKPOINT))?;
    save_checkpoint(&outcome.last, Some(&stats), &out.join(FINAL_CHECKPOINT))?;
    Ok(TrainSummary {
        output_dir: out.clone(),
        best_epoch: outcome.best_epoch,
        best_val_acer: outcome.best_metric,
        epochs_run: outcome.epochs_run,
        stopped_early: outcome.stopped_early,
    })
}

fn checkpoint_model(path: &Path) -> Result<(VisionTransformer, NormalizationStats)> {
    let ckpt = Checkpoint::load(path)?;
    let stats = ckpt.normalization.unwrap_or_else(|| {
        log::warn!("{} carries no normalization statistics; using identity", path.display());
        NormalizationStats::identity()
    });
    Ok((ckpt.model, stats))
}

/// Live probability for one prepared image.
fn score(model: &VisionTransformer, stats: &NormalizationStats, image: &Image) -> Result<f64> {
    let out = model.forward(&normalize(image, stats), false)?;
    Ok(live_probability(&out.logits))
}

/// `evaluate`: scores every record of `manifest` (all splits) and writes
/// `scores.csv`, `report.txt` and `report.json` to `output_dir`.
pub fn cmd_evaluate(
    checkpoint: &Path,
    manifest: &Path,
    threshold: f64,
    variant: ApcerVariant,
    output_dir: &Path,
) -> Result<MetricsReport> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::config("threshold", format!("{threshold} is outside [0, 1]")));
    }
    let (model, stats) = checkpoint_model(checkpoint)?;
    let records = read_manifest(manifest)?;
    if records.is_empty() {
        return Err(Error::Ingestion(format!("{} has no records", manifest.display())));
    }
    let mut preds = Vec::with_capacity(records.len());
    for r in &records {
        let sample = r.load(model.config.image_size)?;
        preds.push(Prediction {
            id: r.path.display().to_string(),
            score: score(&model, &stats, &sample.image)?,
            label: r.label,
            attack_type: (!r.attack_type.is_empty()).then(|| r.attack_type.clone()),
        });
    }
    let preds = PredictionSet::new(preds)?;
    let report = full_report(&preds, threshold, variant)?;
    debug_assert!(report.acer_identity_holds());
    create_dir(output_dir)?;
    write_score_file(&output_dir.join("scores.csv"), &preds)?;
    write_text(&output_dir.join("report.txt"), &report.to_text())?;
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    write_text(&output_dir.join("report.json"), &json)?;
    Ok(report)
}

/// `predict`: live probability of one image (center square crop).
pub fn cmd_predict(checkpoint: &Path, image: &Path) -> Result<f64> {
    let (model, stats) = checkpoint_model(checkpoint)?;
    let frame = Image::open(image)?;
    let face = crop_resize(&frame, None, model.config.image_size)?;
    score(&model, &stats, &face)
}

const GLYPH_W: usize = 5;
const GLYPH_H: usize = 7;

fn glyph(c: char) -> [&'static str; GLYPH_H] {
    match c {
        '(' => ["..#..", ".#...", "#....", "#....", "#....", ".#...", "..#.."],
        ')' => ["..#..", "...#.", "....#", "....#", "....#", "...#.", "..#.."],
        'a' => [".....", ".....", ".###.", "....#", ".####", "#...#", ".####"],
        'b' => ["#....", "#....", "####.", "#...#", "#...#", "#...#", "####."],
        'c' => [".....", ".....", ".####", "#....", "#....", "#....", ".####"],
        'd' => ["....#", "....#", ".####", "#...#", "#...#", "#...#", ".####"],
        'e' => [".....", ".....", ".###.", "#...#", "#####", "#....", ".####"],
        'f' => ["..##.", ".#...", "####.", ".#...", ".#...", ".#...", ".#..."],
        'g' => [".....", ".####", "#...#", "#...#", ".####", "....#", ".###."],
        'h' => ["#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#"],
        _ => ["....."; GLYPH_H],
    }
}

fn draw_text(sheet: &mut Image, text: &str, top: usize, left: usize, scale: usize) {
    for (i, ch) in text.chars().enumerate() {
        let x0 = left + i * (GLYPH_W + 1) * scale;
        for (gy, row) in glyph(ch).iter().enumerate() {
            for (gx, bit) in row.bytes().enumerate() {
                if bit != b'#' {
                    continue;
                }
                for dy in 0..scale {
                    for dx in 0..scale {
                        let (y, x) = (top + gy * scale + dy, x0 + gx * scale + dx);
                        if y < sheet.height() && x < sheet.width() {
                            for c in 0..3 {
                                sheet.set(y, x, c, 0.0);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Panel edge length of the contact sheet.
pub const PREVIEW_PANEL: usize = 224;
const GAP: usize = 4;
const STRIP: usize = 24;

/// Renders the eight operators applied to `image` as a 4×2 sheet with
/// panels labeled `(a)`–`(h)`. Operator parameters for panel `i` come from
/// the stream `(seed, i)`, so the sheet is stable for a fixed seed.
pub fn render_preview(image: &Image, seed: u64, operators: &FasAugParams) -> Result<(Image, Vec<AugmentationOp>)> {
    let face = crop_resize(image, None, PREVIEW_PANEL)?;
    let (cols, rows) = (4, 2);
    let width = cols * PREVIEW_PANEL + (cols + 1) * GAP;
    let height = rows * (PREVIEW_PANEL + STRIP) + (rows + 1) * GAP;
    let mut sheet = Image::filled(height, width, 1.0);
    let mut ops = Vec::with_capacity(OpKind::ALL.len());
    for (i, kind) in OpKind::ALL.into_iter().enumerate() {
        let mut rng = stream(seed, Purpose::Preview, 0, i as u64);
        let op = AugmentationOp::sample(kind, operators, &mut rng);
        let panel = op.apply(&face);
        let (col, row) = (i % cols, i / cols);
        let left = GAP + col * (PREVIEW_PANEL + GAP);
        let top = GAP + row * (PREVIEW_PANEL + STRIP + GAP);
        draw_text(&mut sheet, &format!("({})", kind.letter()), top + 5, left + 4, 2);
        for y in 0..PREVIEW_PANEL {
            for x in 0..PREVIEW_PANEL {
                for c in 0..3 {
                    sheet.set(top + STRIP + y, left + x, c, panel.get(y, x, c));
                }
            }
        }
        ops.push(op);
    }
    Ok((sheet, ops))
}

/// `augment-preview`: writes `fas_aug_preview.png` and a legend naming the
/// operator behind each panel. Returns the sheet path.
pub fn cmd_augment_preview(image: &Path, seed: u64, operators: &FasAugParams, output_dir: &Path) -> Result<PathBuf> {
    let frame = Image::open(image)?;
    let (sheet, ops) = render_preview(&frame, seed, operators)?;
    create_dir(output_dir)?;
    let path = output_dir.join("fas_aug_preview.png");
    sheet.save_png(&path)?;
    let mut legend = String::new();
    for op in &ops {
        legend.push_str(&format!(
            "({}) {} {:?} {:?}\n",
            op.kind.letter(),
            op.kind.name(),
            op.label_effect(),
            op.params
        ));
    }
    write_text(&output_dir.join("fas_aug_preview.txt"), &legend)?;
    Ok(path)
}

/// `stats`: normalization statistics over the train split of `manifest`
/// and the class distribution over all of its records.
pub fn cmd_stats(
    manifest: &Path,
    image_size: usize,
    output_dir: Option<&Path>,
) -> Result<(NormalizationStats, ClassDistribution)> {
    let records = read_manifest(manifest)?;
    let distribution = ClassDistribution::from_pairs(records.iter().map(|r| (r.label, r.attack_type.as_str())));
    let train = DatasetManifest::from_records(Split::Train, records)?.load_samples(image_size)?;
    let stats = compute_stats(&train)?;
    if let Some(dir) = output_dir {
        create_dir(dir)?;
        stats.write(&dir.join(STATS_FILE))?;
        write_text(&dir.join("distribution.txt"), &distribution.to_text())?;
    }
    Ok((stats, distribution))
}

/// `frames-extract`: every manifest record names a directory of frames
/// (or a single image). `k` frames are drawn per video, cropped to the
/// record's box, resized and written to `<output_dir>/<source_id>/<frame_idx>.png`.
/// A manifest of the extracted frames is written to `<output_dir>/manifest.csv`
/// and returned.
pub fn cmd_frames_extract(
    videos: &Path,
    k: usize,
    image_size: usize,
    seed: u64,
    output_dir: &Path,
) -> Result<Vec<SampleRecord>> {
    let records = read_manifest(videos)?;
    create_dir(output_dir)?;
    let mut out = Vec::new();
    for (vi, r) in records.iter().enumerate() {
        let frames = if r.path.is_dir() {
            list_frames(&r.path)?
        } else {
            vec![r.path.clone()]
        };
        let mut rng = stream(seed, Purpose::Frames, 0, vi as u64);
        let picked = sample_frames(frames.len(), k, &mut rng)
            .map_err(|e| Error::Ingestion(format!("{}: {e}", r.path.display())))?;
        let dir = output_dir.join(&r.source_id);
        create_dir(&dir)?;
        for idx in picked {
            let frame = Image::open(&frames[idx])?;
            let face = crop_resize(&frame, r.bbox.as_ref(), image_size)?;
            let rel = PathBuf::from(&r.source_id).join(format!("{idx}.png"));
            face.save_png(&output_dir.join(&rel))?;
            out.push(SampleRecord {
                path: rel,
                label: r.label,
                attack_type: r.attack_type.clone(),
                split: r.split,
                bbox: None,
                source_id: r.source_id.clone(),
            });
        }
    }
    write_manifest(&output_dir.join("manifest.csv"), &out)?;
    Ok(out)
}
