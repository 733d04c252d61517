// The eight FAS-Aug operators on one face-sized image, and the label rule
// applied when the policy fires during training.

use regpad::augment::{apply_fas_aug_traced, AugPolicy, FasAugParams, OpKind};
use regpad::cli::render_preview;
use regpad::data::{Label, Sample};
use regpad::rng::{stream, Purpose};
use regpad::synthetic::smooth_field;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let face = smooth_field(112, &mut stream(1, Purpose::Synthetic, 0, 0));
    let (sheet, ops) = render_preview(&face, 1, &FasAugParams::default())?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("gallery.png");
    sheet.save_png(&path)?;
    println!(
        "contact sheet {}x{} written to {}",
        sheet.width(),
        sheet.height(),
        path.display()
    );
    for op in &ops {
        println!("({}) {:<20} {:?}", op.kind.letter(), op.kind.name(), op.label_effect());
    }

    let policy = AugPolicy {
        fas_aug_probability: 0.2,
        ..AugPolicy::default()
    };
    let live = Sample::new(face, Label::Live, "Live", "face")?;
    let mut counts = [0usize; 8];
    let mut relabelled = 0;
    let draws = 2000;
    for i in 0..draws {
        let mut rng = stream(1, Purpose::Augment, 0, i);
        let (out, kind) = apply_fas_aug_traced(live.clone(), &policy, &mut rng);
        if let Some(kind) = kind {
            counts[OpKind::ALL.iter().position(|&k| k == kind).expect("known kind")] += 1;
            relabelled += usize::from(out.label == Label::Spoof);
        }
    }
    let fired: usize = counts.iter().sum();
    println!("fired {fired}/{draws}, per operator {counts:?}, relabelled as spoof {relabelled}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("augmentation example failed");
}
