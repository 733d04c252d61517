// From per-video frame folders to a face-crop manifest with normalization
// statistics and a class distribution report.

use regpad::cli::{cmd_frames_extract, cmd_stats};
use regpad::data::{write_manifest, BBox, Label, SampleRecord, Split, LIVE_TAG};
use regpad::image::Image;

fn frame(video: usize, t: usize) -> Image {
    Image::from_fn(96, 128, |y, x, c| {
        let v = (x as f32 + 3.0 * t as f32) / 128.0 * 0.5 + y as f32 / 96.0 * 0.3 + 0.1 * c as f32;
        (v + 0.05 * video as f32).fract()
    })
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let videos = [
        (Label::Live, LIVE_TAG, Split::Train),
        (Label::Spoof, "Print", Split::Train),
        (Label::Spoof, "Replay", Split::Train),
        (Label::Live, LIVE_TAG, Split::Val),
    ];
    let mut records = Vec::new();
    for (v, (label, tag, split)) in videos.iter().enumerate() {
        let folder = format!("video{v}");
        std::fs::create_dir_all(dir.path().join(&folder))?;
        for t in 0..8 {
            frame(v, t).save_png(&dir.path().join(&folder).join(format!("{t:03}.png")))?;
        }
        records.push(SampleRecord {
            path: folder.into(),
            label: *label,
            attack_type: tag.to_string(),
            split: *split,
            bbox: Some(BBox::new(24.0, 8.0, 80.0, 80.0)),
            source_id: format!("subject{v}"),
        });
    }
    let videos_manifest = dir.path().join("videos.csv");
    write_manifest(&videos_manifest, &records)?;

    let out = dir.path().join("faces");
    let frames = cmd_frames_extract(&videos_manifest, 3, 56, 0, &out)?;
    println!("extracted {} face crops into {}", frames.len(), out.display());

    let (stats, distribution) = cmd_stats(&out.join("manifest.csv"), 56, Some(&out))?;
    println!("train mean {:.4?} std {:.4?}", stats.mean, stats.std);
    print!("{}", distribution.to_text());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("dataset example failed");
}
