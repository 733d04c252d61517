use std::path::{Path, PathBuf};

use rand::Rng;

use super::sample::BBox;
use crate::error::{Error, Result};
use crate::image::Image;

/// Crops `frame` to `bbox` and resizes the crop to `out_size × out_size`
/// with bilinear resampling. Without a box the largest centered square is
/// used. Boxes reaching outside the frame are clamped with a warning; an
/// empty intersection or a zero-sized box is an error.
pub fn crop_resize(frame: &Image, bbox: Option<&BBox>, out_size: usize) -> Result<Image> {
    let (fw, fh) = (frame.width(), frame.height());
    if out_size == 0 {
        return Err(Error::config("model.image_size", "output size must be positive"));
    }
    let (x0, y0, x1, y1) = match bbox {
        None => {
            let side = fw.min(fh);
            let x0 = (fw - side) / 2;
            let y0 = (fh - side) / 2;
            (x0, y0, x0 + side, y0 + side)
        }
        Some(b) => {
            if !(b.w > 0.0 && b.h > 0.0) {
                return Err(Error::Ingestion(format!("degenerate bounding box {b}")));
            }
            let raw = (b.x.floor(), b.y.floor(), (b.x + b.w).ceil(), (b.y + b.h).ceil());
            let x0 = raw.0.clamp(0.0, fw as f64);
            let y0 = raw.1.clamp(0.0, fh as f64);
            let x1 = raw.2.clamp(0.0, fw as f64);
            let y1 = raw.3.clamp(0.0, fh as f64);
            if x1 <= x0 || y1 <= y0 {
                return Err(Error::Ingestion(format!(
                    "bounding box {b} does not intersect the {fw}x{fh} frame"
                )));
            }
            if (x0, y0, x1, y1) != raw {
                log::warn!("bounding box {b} clamped to the {fw}x{fh} frame");
            }
            (x0 as usize, y0 as usize, x1 as usize, y1 as usize)
        }
    };
    let crop = frame.crop(x0, y0, x1 - x0, y1 - y0)?;
    Ok(crop.resize_bilinear(out_size, out_size))
}

/// Draws `k` distinct frame indices uniformly without replacement, sorted
/// ascending. Videos shorter than `k` yield every frame.
pub fn sample_frames<R: Rng + ?Sized>(n_frames: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n_frames == 0 {
        return Err(Error::Ingestion("video has no frames".into()));
    }
    if n_frames <= k {
        return Ok((0..n_frames).collect());
    }
    let mut idx = rand::seq::index::sample(rng, n_frames, k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

const FRAME_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Lists the frame images of a frame directory in file-name order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    frames.sort();
    Ok(frames)
}
