// End-to-end acceptance checks. Each criterion prints one PASS or FAIL line
// and the process exits nonzero if any criterion fails. Criteria run
// sequentially so the timed training runs are not slowed by concurrent tests.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regpad::augment::{apply_fas_aug_traced, AugPolicy, LabelEffect, OpKind};
use regpad::cli::{cmd_train, BEST_CHECKPOINT, TRAIN_LOG};
use regpad::config::RunConfig;
use regpad::data::{compute_stats, Label, Sample, Split};
use regpad::image::Image;
use regpad::metrics::{self, Prediction, PredictionSet};
use regpad::rng::{stream, Purpose};
use regpad::synthetic::{export_datasets, synthetic_dataset, SyntheticSpec};
use regpad::train::{
    cross_entropy, fit, focal_loss, loss_and_grad, predict_dataset, FreezePolicy, GroupLr, LossKind, Optimizer,
    OptimizerKind,
};
use regpad::vit::{live_probability, Logits, ModelConfig, ParamGroup, VisionTransformer, VitParams};

const RATE_TOL: f64 = 1e-12;
const ORACLE_BUDGET_S: f64 = 60.0;
const TABLE_TOL: f64 = 1e-4;
const FOCAL_CE_TOL: f64 = 1e-9;
const FOCAL_GRAD_REL_TOL: f64 = 1e-4;
const FREEZE_STEPS: usize = 50;
const ATTENTION_ROW_TOL: f64 = 1e-5;
const AUG_DRAWS: u64 = 10_000;
const AUG_RATE_TOL: f64 = 0.01;
const AUG_OP_TOL: f64 = 0.02;
const TOY_MAX_ACER: f64 = 0.05;
const TOY_MIN_AUC: f64 = 0.99;
const TOY_MAX_EPOCHS: usize = 30;
const TOY_BUDGET_S: f64 = 600.0;
const TOY_SEEDS: [u64; 3] = [0, 1, 2];
const EER_RANDOM_TOL: f64 = 0.05;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

// ---------------------------------------------------------------- oracle

#[derive(Clone, Copy)]
enum Kind {
    Live,
    SpoofA,
    SpoofB,
}

struct OracleValues {
    apcer: f64,
    apcer_worst: f64,
    bpcer: f64,
    acer: f64,
    acc: f64,
    auc: f64,
    eer: f64,
}

fn oracle(items: &[(f64, Kind)], t: f64) -> OracleValues {
    let live: Vec<f64> = items
        .iter()
        .filter(|i| matches!(i.1, Kind::Live))
        .map(|i| i.0)
        .collect();
    let spoof: Vec<f64> = items
        .iter()
        .filter(|i| !matches!(i.1, Kind::Live))
        .map(|i| i.0)
        .collect();
    let (nl, ns) = (live.len() as f64, spoof.len() as f64);
    let accepted = |v: &[f64]| v.iter().filter(|&&s| s >= t).count() as f64;
    let apcer = accepted(&spoof) / ns;
    let bpcer = (nl - accepted(&live)) / nl;
    let mut worst: f64 = 0.0;
    for tag in [1, 2] {
        let group: Vec<f64> = items
            .iter()
            .filter(|i| matches!((tag, i.1), (1, Kind::SpoofA) | (2, Kind::SpoofB)))
            .map(|i| i.0)
            .collect();
        if !group.is_empty() {
            worst = worst.max(accepted(&group) / group.len() as f64);
        }
    }
    let correct = accepted(&live) + (ns - accepted(&spoof));
    let mut wins = 0.0;
    for &l in &live {
        for &s in &spoof {
            wins += if l > s {
                1.0
            } else if l == s {
                0.5
            } else {
                0.0
            };
        }
    }
    // every operating point reachable on the 0.1 grid, plus reject-all
    let mut cuts = BTreeSet::new();
    for k in 1..=10 {
        let th = k as f64 / 10.0;
        let a = spoof.iter().filter(|&&s| s >= th).count();
        let b = live.iter().filter(|&&s| s < th).count();
        cuts.insert((a, b));
    }
    let gap = |&(a, b): &(usize, usize)| (a as i64 * nl as i64 - b as i64 * ns as i64).abs();
    let best = cuts.iter().map(gap).min().unwrap();
    let tied: Vec<&(usize, usize)> = cuts.iter().filter(|c| gap(c) == best).collect();
    let eer = tied
        .iter()
        .map(|&&(a, b)| (a as f64 / ns + b as f64 / nl) / 2.0)
        .sum::<f64>()
        / tied.len() as f64;
    OracleValues {
        apcer,
        apcer_worst: worst,
        bpcer,
        acer: (apcer + bpcer) / 2.0,
        acc: correct / (nl + ns),
        auc: wins / (nl * ns),
        eer,
    }
}

fn grid_score(k: usize) -> f64 {
    [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9][k]
}

fn prediction_set(items: &[(f64, Kind)]) -> PredictionSet {
    PredictionSet::new(
        items
            .iter()
            .map(|&(s, k)| match k {
                Kind::Live => Prediction::new(s, Label::Live),
                Kind::SpoofA => Prediction::tagged(s, Label::Spoof, "A"),
                Kind::SpoofB => Prediction::tagged(s, Label::Spoof, "B"),
            })
            .collect(),
    )
    .unwrap()
}

fn compare(items: &[(f64, Kind)]) -> Option<String> {
    let preds = prediction_set(items);
    let t = metrics::DEFAULT_THRESHOLD;
    let o = oracle(items, t);
    let apcer = metrics::apcer(&preds, t).unwrap();
    let bpcer = metrics::bpcer(&preds, t).unwrap();
    let got = [
        ("APCER", apcer, o.apcer),
        (
            "worst APCER",
            metrics::apcer_worst_case(&preds, t).unwrap(),
            o.apcer_worst,
        ),
        ("BPCER", bpcer, o.bpcer),
        ("ACER", metrics::acer(apcer, bpcer), o.acer),
        ("ACC", metrics::acc(&preds, t).unwrap(), o.acc),
        ("AUC", metrics::auc(&preds).unwrap(), o.auc),
        ("EER", metrics::eer(&preds).unwrap().rate, o.eer),
    ];
    got.iter()
        .find(|(_, a, b)| (a - b).abs() > RATE_TOL)
        .map(|(name, a, b)| format!("{name} {a} vs oracle {b}"))
}

fn kinds(n: usize, code: usize) -> Vec<Kind> {
    let mut c = code;
    (0..n)
        .map(|_| {
            let k = [Kind::Live, Kind::SpoofA, Kind::SpoofB][c % 3];
            c /= 3;
            k
        })
        .collect()
}

fn has_both(ks: &[Kind]) -> bool {
    ks.iter().any(|k| matches!(k, Kind::Live)) && ks.iter().any(|k| !matches!(k, Kind::Live))
}

// Sets of size <= 3 take every score vector on the grid; larger sets take
// every label/tag assignment with two seeded score vectors each.
fn criterion_metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=8usize {
        for code in 0..3usize.pow(n as u32) {
            let ks = kinds(n, code);
            if !has_both(&ks) {
                continue;
            }
            let score_vectors: Vec<Vec<f64>> = if n <= 3 {
                (0..9usize.pow(n as u32))
                    .map(|s| {
                        let mut s = s;
                        (0..n)
                            .map(|_| {
                                let v = grid_score(s % 9);
                                s /= 9;
                                v
                            })
                            .collect()
                    })
                    .collect()
            } else {
                (0..2)
                    .map(|_| (0..n).map(|_| grid_score(rng.random_range(0..9))).collect())
                    .collect()
            };
            for scores in score_vectors {
                let items: Vec<(f64, Kind)> = scores.into_iter().zip(ks.iter().copied()).collect();
                if let Some(msg) = compare(&items) {
                    return outcome(false, format!("mismatch on {} records: {msg}", items.len()));
                }
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        secs < ORACLE_BUDGET_S,
        format!("{checked} prediction sets match the brute-force oracle within {RATE_TOL:e} in {secs:.1}s"),
    )
}

// ---------------------------------------------------------------- table

fn counted_set(spoof_accepted: usize, n_spoof: usize, live_rejected: usize, n_live: usize) -> PredictionSet {
    let mut records = Vec::new();
    for i in 0..n_spoof {
        let s = if i < spoof_accepted { 0.9 } else { 0.1 };
        records.push(Prediction::tagged(s, Label::Spoof, "Print"));
    }
    for i in 0..n_live {
        let s = if i < live_rejected { 0.1 } else { 0.9 };
        records.push(Prediction::new(s, Label::Live));
    }
    PredictionSet::new(records).unwrap()
}

fn criterion_table_arithmetic() -> Outcome {
    let rows = [(6318, 0, 0.3159), (4334, 769, 0.2552)];
    let mut details = Vec::new();
    let mut pass = true;
    for (accepted, rejected, expected) in rows {
        let preds = counted_set(accepted, 10_000, rejected, 10_000);
        let apcer = metrics::apcer(&preds, 0.5).unwrap();
        let bpcer = metrics::bpcer(&preds, 0.5).unwrap();
        let acer = metrics::acer(apcer, bpcer);
        pass &= (acer - expected).abs() <= TABLE_TOL;
        details.push(format!(
            "APCER {apcer:.4} BPCER {bpcer:.4} -> ACER {acer:.5} (expected {expected})"
        ));
    }
    outcome(pass, details.join("; "))
}

// ---------------------------------------------------------------- focal

fn criterion_focal() -> Outcome {
    let mut max_ce = 0.0f64;
    for k in 1..=99 {
        let p_t = k as f64 / 100.0;
        for label in [Label::Live, Label::Spoof] {
            let live_prob = if label == Label::Live { p_t } else { 1.0 - p_t };
            let d = (focal_loss(live_prob, label, 0.0, [1.0, 1.0]) - cross_entropy(live_prob, label)).abs();
            max_ce = max_ce.max(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut max_rel = 0.0f64;
    for _ in 0..100 {
        let logits = Logits {
            values: [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)],
        };
        let label = if rng.random_bool(0.5) {
            Label::Live
        } else {
            Label::Spoof
        };
        let kind = LossKind::Focal {
            gamma: 2.0,
            class_weights: [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)],
        };
        let (_, grad) = loss_and_grad(&kind, &logits, label);
        for (j, &g) in grad.iter().enumerate() {
            let h = 1e-5;
            let (mut up, mut down) = (logits, logits);
            up.values[j] += h;
            down.values[j] -= h;
            let fd = (loss_and_grad(&kind, &up, label).0 - loss_and_grad(&kind, &down, label).0) / (2.0 * h);
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-12);
            max_rel = max_rel.max(rel);
        }
    }
    outcome(
        max_ce < FOCAL_CE_TOL && max_rel < FOCAL_GRAD_REL_TOL,
        format!("max |focal(0) - CE| = {max_ce:.2e}, max gradient relative error = {max_rel:.2e}"),
    )
}

// ---------------------------------------------------------------- freeze

fn small_depth12() -> ModelConfig {
    ModelConfig {
        image_size: 28,
        patch_size: 14,
        embed_dim: 16,
        depth: 12,
        num_heads: 2,
        mlp_ratio: 2.0,
        num_register_tokens: 4,
        ..ModelConfig::default()
    }
}

fn train_steps(
    model: &mut VisionTransformer,
    policy: &FreezePolicy,
    optimizer: OptimizerKind,
    loss: &LossKind,
    lr: GroupLr,
    steps: usize,
) {
    let resolved = policy.resolve(model.config.depth).unwrap();
    let mut opt = Optimizer::new(optimizer, &model.params);
    let size = model.config.image_size;
    for step in 0..steps {
        let mut rng = stream(99, Purpose::Synthetic, 0, step as u64);
        let mut grads = VitParams::zeros(&model.config);
        for _ in 0..2 {
            let image = Image::from_fn(size, size, |_, _, _| rng.random());
            let label = if rng.random_bool(0.5) {
                Label::Live
            } else {
                Label::Spoof
            };
            let (logits, trace) = model.forward_train(&image, None::<&mut ChaCha8Rng>).unwrap();
            let (_, dlogits) = loss_and_grad(loss, &logits, label);
            model.backward(&trace, dlogits, &|g| resolved.is_trainable(g), &mut grads);
        }
        opt.step(&mut model.params, &grads, &resolved, lr).unwrap();
    }
}

fn criterion_freeze() -> Outcome {
    let cfg = small_depth12();
    let initial = VisionTransformer::init(cfg.clone(), &mut stream(4, Purpose::Init, 0, 0)).unwrap();

    let mut partial = initial.clone();
    let policy = FreezePolicy::blocks("12".parse().unwrap());
    let loss = LossKind::default();
    let lr = GroupLr {
        head: 1e-3,
        backbone: 1e-3,
    };
    train_steps(&mut partial, &policy, OptimizerKind::adamw(), &loss, lr, FREEZE_STEPS);
    let (mut moved_frozen, mut still_trainable) = (0usize, 0usize);
    for (a, b) in initial.params.tensors().iter().zip(partial.params.tensors()) {
        let trainable = matches!(a.group, ParamGroup::Block(11) | ParamGroup::Head);
        let changed = a
            .data
            .iter()
            .zip(b.data)
            .filter(|(x, y)| x.to_bits() != y.to_bits())
            .count();
        if trainable {
            still_trainable += a.data.len() - changed;
        } else {
            moved_frozen += changed;
        }
    }

    let siw = RunConfig::load(&configs().join("siw.cfg")).unwrap();
    let mut full = initial.clone();
    let siw_lr = GroupLr {
        head: siw.train.lr_head,
        backbone: siw.train.lr_backbone,
    };
    train_steps(
        &mut full,
        &siw.train.freeze,
        siw.train.optimizer.clone(),
        &siw.train.loss,
        siw_lr,
        FREEZE_STEPS,
    );
    let total = initial.params.num_parameters();
    let unchanged_full = initial
        .params
        .tensors()
        .iter()
        .zip(full.params.tensors())
        .map(|(a, b)| {
            a.data
                .iter()
                .zip(b.data)
                .filter(|(x, y)| x.to_bits() == y.to_bits())
                .count()
        })
        .sum::<usize>();
    outcome(
        moved_frozen == 0 && unchanged_full == 0,
        format!(
            "block 12 + head: {moved_frozen} frozen scalars moved ({still_trainable} trainable scalars unmoved); \
             full unfreeze: {unchanged_full} of {total} scalars unchanged after {FREEZE_STEPS} steps"
        ),
    )
}

// ---------------------------------------------------------------- layout

fn criterion_token_layout() -> Outcome {
    let with = ModelConfig::default();
    let without = ModelConfig {
        num_register_tokens: 0,
        ..ModelConfig::default()
    };
    let (len4, len0) = (with.layout().total, without.layout().total);

    // full token geometry, narrow width so all 12 x 12 maps are cheap
    let narrow = ModelConfig {
        embed_dim: 96,
        ..ModelConfig::default()
    };
    let model = VisionTransformer::init(narrow.clone(), &mut stream(8, Purpose::Init, 0, 0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let image = Image::from_fn(224, 224, |_, _, _| rng.random());
    let out = model.forward(&image, true).unwrap();
    let worst = out
        .attention
        .iter()
        .flat_map(|a| {
            a.weights
                .rows()
                .into_iter()
                .map(|r| (r.sum() - 1.0).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0f64, f64::max);
    let shapes_ok = out.attention.len() == 144 && out.attention.iter().all(|a| a.weights.dim() == (len4, len4));
    outcome(
        len4 == 261 && len0 == 257 && shapes_ok && worst <= ATTENTION_ROW_TOL,
        format!(
            "sequence length {len4} with 4 registers, {len0} without; {} attention maps, max |row sum - 1| = {worst:.1e}",
            out.attention.len()
        ),
    )
}

// ---------------------------------------------------------------- augmentation

fn criterion_augmentation() -> Outcome {
    let policy = AugPolicy {
        fas_aug_probability: 0.2,
        ..AugPolicy::default()
    };
    let image = Image::from_fn(32, 32, |y, x, c| ((x + 2 * y + 3 * c) % 13) as f32 / 12.0);
    let live = Sample::new(image.clone(), Label::Live, "Live", "a").unwrap();
    let spoof = Sample::new(image, Label::Spoof, "Replay", "b").unwrap();
    let mut counts = [0usize; 8];
    let mut violations = 0usize;
    for i in 0..AUG_DRAWS {
        let mut rng = stream(21, Purpose::Augment, 0, i);
        let (out, kind) = apply_fas_aug_traced(live.clone(), &policy, &mut rng);
        if let Some(kind) = kind {
            counts[OpKind::ALL.iter().position(|&k| k == kind).unwrap()] += 1;
            let expected = match kind.label_effect() {
                LabelEffect::Preserve => Label::Live,
                LabelEffect::ForceSpoof => Label::Spoof,
            };
            violations += usize::from(out.label != expected);
        } else {
            violations += usize::from(out != live);
        }
        let mut rng = stream(22, Purpose::Augment, 0, i);
        let (out, _) = apply_fas_aug_traced(spoof.clone(), &policy, &mut rng);
        violations += usize::from(out.label != Label::Spoof || out.attack_type != "Replay");
    }
    let fired: usize = counts.iter().sum();
    let rate = fired as f64 / AUG_DRAWS as f64;
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / fired as f64).collect();
    let worst_dev = freqs.iter().map(|f| (f - 0.125).abs()).fold(0.0f64, f64::max);
    outcome(
        (rate - 0.2).abs() <= AUG_RATE_TOL && worst_dev <= AUG_OP_TOL && violations == 0,
        format!(
            "firing rate {rate:.4}, max |operator frequency - 1/8| = {worst_dev:.4}, {violations} label violations"
        ),
    )
}

// ---------------------------------------------------------------- toy run

fn criterion_toy_separability() -> Outcome {
    let base = RunConfig::load(&configs().join("toy.cfg")).unwrap();
    let mut pass = base.train.max_epochs <= TOY_MAX_EPOCHS;
    let mut details = Vec::new();
    for seed in TOY_SEEDS {
        let mut cfg = base.clone();
        cfg.set_seed(seed);
        cfg.train.log_timestamps = false;
        let size = cfg.model.image_size;
        let start = Instant::now();
        let train = synthetic_dataset(Split::Train, &SyntheticSpec::balanced(800, size, seed));
        let val = synthetic_dataset(Split::Val, &SyntheticSpec::balanced(200, size, seed));
        let stats = compute_stats(&train).unwrap();
        let model = VisionTransformer::init(cfg.model.clone(), &mut stream(seed, Purpose::Init, 0, 0)).unwrap();
        let out = fit(model, &train, &val, &stats, &cfg.train, &cfg.augment).unwrap();
        let preds = predict_dataset(&out.best, &val, &stats).unwrap();
        let acer = metrics::acer(
            metrics::apcer(&preds, 0.5).unwrap(),
            metrics::bpcer(&preds, 0.5).unwrap(),
        );
        let auc = metrics::auc(&preds).unwrap();
        let secs = start.elapsed().as_secs_f64();

        let test = synthetic_dataset(Split::Test, &SyntheticSpec::balanced(200, size, seed));
        let test_preds = predict_dataset(&out.best, &test, &stats).unwrap();
        let test_acer = metrics::acer(
            metrics::apcer(&test_preds, 0.5).unwrap(),
            metrics::bpcer(&test_preds, 0.5).unwrap(),
        );
        pass &= acer <= TOY_MAX_ACER && auc >= TOY_MIN_AUC && secs < TOY_BUDGET_S;
        details.push(format!(
            "seed {seed}: val ACER {acer:.3} AUC {auc:.4} (epoch {} of {}, {secs:.0}s; test ACER {test_acer:.3})",
            out.best_epoch, out.epochs_run
        ));
    }
    outcome(pass, details.join("; "))
}

// ---------------------------------------------------------------- EER sanity

fn criterion_eer_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut records = Vec::new();
    for _ in 0..1000 {
        records.push(Prediction::new(rng.random(), Label::Live));
        records.push(Prediction::tagged(rng.random(), Label::Spoof, "Print"));
    }
    let random = metrics::eer(&PredictionSet::new(records).unwrap()).unwrap().rate;
    let separated = PredictionSet::new(
        (0..1000)
            .flat_map(|i| {
                [
                    Prediction::new(0.6 + 0.4 * i as f64 / 1000.0, Label::Live),
                    Prediction::tagged(0.4 * i as f64 / 1000.0, Label::Spoof, "Print"),
                ]
            })
            .collect(),
    )
    .unwrap();
    let sep_eer = metrics::eer(&separated).unwrap().rate;
    let sep_auc = metrics::auc(&separated).unwrap();
    outcome(
        (random - 0.5).abs() <= EER_RANDOM_TOL && sep_eer == 0.0 && sep_auc == 1.0,
        format!("uniform scores EER {random:.4}; separated scores EER {sep_eer} AUC {sep_auc}"),
    )
}

// ---------------------------------------------------------------- determinism

const DETERMINISM_CONFIG: &str = r#"
seed = 17

[model]
image_size = 28
patch_size = 14
embed_dim = 16
depth = 2
num_heads = 2
mlp_ratio = 2.0
num_register_tokens = 2
drop_rate = 0.1

[train]
lr_head = 1e-3
lr_backbone = 1e-4
batch_size = 4
max_epochs = 3
patience = 2
warmup_epochs = 1
log_timestamps = false

[augment]
fas_aug_probability = 0.5

[data]
train_manifest = "data/manifest.csv"
val_manifest = "data/manifest.csv"
"#;

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let train = synthetic_dataset(Split::Train, &SyntheticSpec::balanced(16, 28, 17));
    let val = synthetic_dataset(Split::Val, &SyntheticSpec::balanced(8, 28, 17));
    export_datasets(&dir.path().join("data"), &[&train, &val]).unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, DETERMINISM_CONFIG).unwrap();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let mut cfg = RunConfig::load(&path).unwrap();
        cfg.output_dir = dir.path().join(name);
        cmd_train(&cfg).unwrap();
        let log = std::fs::read(cfg.output_dir.join(TRAIN_LOG)).unwrap();
        let ckpt = std::fs::read(cfg.output_dir.join(BEST_CHECKPOINT)).unwrap();
        runs.push((log, ckpt));
    }
    let lines = String::from_utf8_lossy(&runs[0].0).lines().count();
    let model_a = regpad::vit::Checkpoint::load(&dir.path().join("a").join(BEST_CHECKPOINT)).unwrap();
    let probe = model_a.model.forward(&train.samples[0].image, false).unwrap();
    outcome(
        lines > 0 && runs[0] == runs[1],
        format!(
            "{lines} log records, logs identical: {}, checkpoints identical: {} (probe score {:.6})",
            runs[0].0 == runs[1].0,
            runs[0].1 == runs[1].1,
            live_probability(&probe.logits)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("metric oracle equivalence", criterion_metric_oracle),
        ("table arithmetic", criterion_table_arithmetic),
        ("focal loss reduction and gradient", criterion_focal),
        ("freeze soundness", criterion_freeze),
        ("token layout and attention", criterion_token_layout),
        ("augmentation semantics", criterion_augmentation),
        ("toy end-to-end separability", criterion_toy_separability),
        ("EER sanity", criterion_eer_sanity),
        ("training determinism", criterion_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "{} {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
