use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use regpad::augment::FasAugParams;
use regpad::cli::{self, Overrides};
use regpad::config::RunConfig;
use regpad::metrics::{ApcerVariant, DEFAULT_THRESHOLD};
use regpad::vit::ModelConfig;

#[derive(Parser)]
#[command(
    name = "regpad",
    version,
    about = "Face presentation-attack detection with a register-token ViT"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Operating threshold on the live probability.
    #[arg(long, global = true, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Report the worst APCER over attack types as the headline APCER.
    #[arg(long, global = true)]
    worst_case_apcer: bool,
    /// Where outputs are written.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model as described by --config.
    Train,
    /// Score a manifest with a checkpoint and write a metrics report.
    Evaluate { checkpoint: PathBuf, manifest: PathBuf },
    /// Print the live probability of one image.
    Predict { checkpoint: PathBuf, image: PathBuf },
    /// Write a contact sheet of the eight FAS-Aug operators.
    AugmentPreview { image: PathBuf },
    /// Normalization statistics and class distribution of a manifest.
    Stats { manifest: PathBuf },
    /// Sample, crop and resize frames from per-video frame directories.
    FramesExtract { manifest: PathBuf },
}

fn optional_config(cli: &Cli) -> regpad::Result<RunConfig> {
    let overrides = Overrides {
        seed: cli.seed,
        output_dir: cli.output_dir.clone(),
    };
    let mut cfg = match &cli.config {
        Some(path) => cli::load_config(path, &overrides)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    Ok(cfg)
}

fn output_dir(cli: &Cli, fallback: &Path) -> PathBuf {
    cli.output_dir.clone().unwrap_or_else(|| fallback.to_path_buf())
}

fn run(cli: Cli) -> regpad::Result<()> {
    match &cli.command {
        Command::Train => {
            let Some(path) = &cli.config else {
                return Err(regpad::Error::Config {
                    field: "--config".into(),
                    message: "train requires a config file".into(),
                });
            };
            let overrides = Overrides {
                seed: cli.seed,
                output_dir: cli.output_dir.clone(),
            };
            let cfg = cli::load_config(path, &overrides)?;
            let s = cli::cmd_train(&cfg)?;
            println!(
                "best epoch {} (val ACER {}), {} epochs run{}; outputs in {}",
                s.best_epoch,
                s.best_val_acer,
                s.epochs_run,
                if s.stopped_early { ", stopped early" } else { "" },
                s.output_dir.display()
            );
        }
        Command::Evaluate { checkpoint, manifest } => {
            let variant = if cli.worst_case_apcer {
                ApcerVariant::WorstCase
            } else {
                ApcerVariant::Average
            };
            let out = output_dir(&cli, Path::new("."));
            let report = cli::cmd_evaluate(checkpoint, manifest, cli.threshold, variant, &out)?;
            print!("{}", report.to_text());
        }
        Command::Predict { checkpoint, image } => {
            println!("{}", cli::cmd_predict(checkpoint, image)?);
        }
        Command::AugmentPreview { image } => {
            let cfg = optional_config(&cli)?;
            let operators: FasAugParams = cfg.augment.operators.clone();
            let out = output_dir(&cli, Path::new("."));
            let path = cli::cmd_augment_preview(image, cli.seed.unwrap_or(cfg.seed), &operators, &out)?;
            println!("{}", path.display());
        }
        Command::Stats { manifest } => {
            let size = match &cli.config {
                Some(_) => optional_config(&cli)?.model.image_size,
                None => ModelConfig::default().image_size,
            };
            let (stats, dist) = cli::cmd_stats(manifest, size, cli.output_dir.as_deref())?;
            println!("mean {:?}\nstd {:?}\n", stats.mean, stats.std);
            print!("{}", dist.to_text());
        }
        Command::FramesExtract { manifest } => {
            let cfg = optional_config(&cli)?;
            let out = output_dir(&cli, Path::new("frames"));
            let records = cli::cmd_frames_extract(
                manifest,
                cfg.data.frames_per_video,
                cfg.model.image_size,
                cli.seed.unwrap_or(cfg.seed),
                &out,
            )?;
            println!("{} frames written to {}", records.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
