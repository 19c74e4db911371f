//! `thg train` / `thg eval` / `thg grid`: training runs with metrics
//! and checkpoints, checkpoint evaluation, and the (K, alpha) sweep.

use crate::config::{self, FileConfig};
use crate::data::{load_dataset, DataArgs};
use crate::manifest::RunManifest;
use crate::{CliError, CliResult, Common};
use clap::{Args, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use thg_core::nn::{
    evaluate, grid_search, restore_weights, train_checkpointed, Activation, Checkpoint,
    ModelConfig, Readout, TrainConfig, TrainOutcome, Variant,
};
use thg_core::Dataset;

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum VariantArg {
    Thgcn,
    Thgin,
    Mlp,
    CliqueMlp,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Thgcn => Variant::THgcn,
            VariantArg::Thgin => Variant::THgin,
            VariantArg::Mlp => Variant::Mlp,
            VariantArg::CliqueMlp => Variant::CliqueMlp,
        }
    }
}

fn parse_variant(s: &str) -> CliResult<Variant> {
    match s {
        "thgcn" => Ok(Variant::THgcn),
        "thgin" => Ok(Variant::THgin),
        "mlp" => Ok(Variant::Mlp),
        "clique-mlp" | "clique_mlp" => Ok(Variant::CliqueMlp),
        other => Err(CliError::usage(format!("unknown variant '{other}'"))),
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ReadoutArg {
    SliceSum,
    LeadingSlice,
}

impl From<ReadoutArg> for Readout {
    fn from(r: ReadoutArg) -> Readout {
        match r {
            ReadoutArg::SliceSum => Readout::SliceSum,
            ReadoutArg::LeadingSlice => Readout::LeadingSlice,
        }
    }
}

fn parse_readout(s: &str) -> CliResult<Readout> {
    match s {
        "slice-sum" | "slice_sum" => Ok(Readout::SliceSum),
        "leading-slice" | "leading_slice" => Ok(Readout::LeadingSlice),
        other => Err(CliError::usage(format!("unknown readout '{other}'"))),
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelFlags {
    /// Layer variant.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Hidden layer width.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Teleport probability alpha (iterative variant).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Propagation steps K (iterative variant).
    #[arg(long = "K", visible_alias = "k")]
    pub k: Option<usize>,
    /// Readout from the tensor output to per-node scores.
    #[arg(long, value_enum)]
    pub readout: Option<ReadoutArg>,
}

#[derive(Args, Debug, Clone)]
pub struct TrainFlags {
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Early-stop patience in epochs (default: no early stop).
    #[arg(long)]
    pub patience: Option<usize>,
}

fn resolve_model(
    flags: &ModelFlags,
    file: &FileConfig,
    dataset: &Dataset,
    seed: u64,
) -> CliResult<ModelConfig> {
    let variant = match flags.variant {
        Some(v) => Variant::from(v),
        None => match &file.variant {
            Some(s) => parse_variant(s)?,
            None => Variant::THgin,
        },
    };
    let readout = match flags.readout {
        Some(r) => Readout::from(r),
        None => match &file.readout {
            Some(s) => parse_readout(s)?,
            None => Readout::SliceSum,
        },
    };
    let hidden = config::resolve(flags.hidden, file.hidden, 64);
    Ok(ModelConfig {
        layer_dims: vec![dataset.feature_dim(), hidden, dataset.num_classes()],
        variant,
        alpha: config::resolve(flags.alpha, file.alpha, 0.1),
        k: config::resolve(flags.k, file.k, 3),
        activation: Activation::Relu,
        readout,
        seed,
    })
}

fn resolve_train(flags: &TrainFlags, file: &FileConfig) -> TrainConfig {
    let epochs = config::resolve(flags.epochs, file.epochs, 200);
    TrainConfig {
        lr: config::resolve(flags.lr, file.lr, 0.01),
        weight_decay: config::resolve(flags.weight_decay, file.weight_decay, 0.0005),
        epochs,
        patience: config::resolve(flags.patience, file.patience, epochs),
        ..TrainConfig::default()
    }
}

#[derive(Serialize)]
struct ResolvedRun<'a> {
    model: &'a ModelConfig,
    train: &'a TrainConfig,
    synthetic: bool,
}

fn write_metrics(path: &PathBuf, outcome: &TrainOutcome) -> CliResult {
    let mut csv = String::from("epoch,train_loss,train_acc,val_acc\n");
    for m in &outcome.metrics {
        csv.push_str(&format!("{},{},{},{}\n", m.epoch, m.train_loss, m.train_acc, m.val_acc));
    }
    std::fs::write(path, csv)?;
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Checkpoint output (default: <out-dir>/checkpoint.json).
    #[arg(long)]
    pub checkpoint_out: Option<PathBuf>,
    /// Metrics CSV output (default: <out-dir>/metrics.csv).
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
}

pub fn run_train(common: &Common, args: TrainArgs) -> CliResult {
    let file_cfg = config::load(common.config.as_deref())?;
    let seed = config::resolve(common.seed, file_cfg.seed, 0);
    let mut manifest = RunManifest::new("train", seed);
    let dataset = load_dataset(&args.data, seed, &mut manifest)?;
    let model = resolve_model(&args.model, &file_cfg, &dataset, seed)?;
    let train_cfg = resolve_train(&args.train, &file_cfg);
    manifest.set_config(ResolvedRun {
        model: &model,
        train: &train_cfg,
        synthetic: args.data.synthetic,
    })?;

    let (outcome, ckpt) = manifest.time("train", || {
        train_checkpointed(&dataset, &model, &train_cfg, train_cfg.epochs)
    })?;

    std::fs::create_dir_all(&common.out_dir)?;
    let ckpt_path =
        args.checkpoint_out.clone().unwrap_or_else(|| common.out_dir.join("checkpoint.json"));
    std::fs::write(&ckpt_path, serde_json::to_string(&ckpt)? + "\n")?;
    let metrics_path =
        args.metrics_out.clone().unwrap_or_else(|| common.out_dir.join("metrics.csv"));
    write_metrics(&metrics_path, &outcome)?;
    manifest.write(&common.out_dir)?;

    let last = outcome.metrics.last();
    if common.json {
        println!(
            "{}",
            serde_json::json!({
                "epochs_run": outcome.metrics.len(),
                "final_train_acc": last.map(|m| m.train_acc),
                "best_val_acc": outcome.best_val_acc,
                "best_epoch": outcome.best_epoch,
                "test_acc": outcome.test_acc,
                "checkpoint": ckpt_path.display().to_string(),
                "metrics": metrics_path.display().to_string(),
            })
        );
    } else {
        println!(
            "trained {} epochs: best val acc {:.4} (epoch {}), test acc {:.4} -> {}",
            outcome.metrics.len(),
            outcome.best_val_acc,
            outcome.best_epoch,
            outcome.test_acc,
            ckpt_path.display()
        );
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Checkpoint produced by `thg train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Report JSON output (default: <out-dir>/report.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run_eval(common: &Common, args: EvalArgs) -> CliResult {
    let file_cfg = config::load(common.config.as_deref())?;
    let seed = config::resolve(common.seed, file_cfg.seed, 0);
    let mut manifest = RunManifest::new("eval", seed);
    manifest.add_input(&args.checkpoint)?;
    let dataset = load_dataset(&args.data, seed, &mut manifest)?;
    let text = std::fs::read_to_string(&args.checkpoint)?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    manifest.set_config(&ckpt.model)?;

    let weights = restore_weights(&ckpt.best_weights)?;
    let report = evaluate(&dataset, &ckpt.model, &weights)?;

    std::fs::create_dir_all(&common.out_dir)?;
    let report_path = args.report.clone().unwrap_or_else(|| common.out_dir.join("report.json"));
    let body = serde_json::json!({
        "train_acc": report.train_acc,
        "val_acc": report.val_acc,
        "test_acc": report.test_acc,
    });
    std::fs::write(&report_path, serde_json::to_string_pretty(&body)? + "\n")?;
    manifest.write(&common.out_dir)?;
    if common.json {
        println!("{body}");
    } else {
        println!(
            "train acc {:.4}, val acc {:.4}, test acc {:.4} -> {}",
            report.train_acc,
            report.val_acc,
            report.test_acc,
            report_path.display()
        );
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    /// K values to sweep.
    #[arg(long, default_value = "1,2,3,4,5", value_delimiter = ',')]
    pub k_values: Vec<usize>,
    /// alpha values to sweep.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5", value_delimiter = ',')]
    pub alpha_values: Vec<f64>,
    /// Seeded repeats per grid cell (seeds seed..seed+runs).
    #[arg(long)]
    pub runs: Option<usize>,
    /// Grid CSV output (default: <out-dir>/grid.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_grid(common: &Common, args: GridArgs) -> CliResult {
    let file_cfg = config::load(common.config.as_deref())?;
    let seed = config::resolve(common.seed, file_cfg.seed, 0);
    let mut manifest = RunManifest::new("grid", seed);
    let dataset = load_dataset(&args.data, seed, &mut manifest)?;
    let base = resolve_model(&args.model, &file_cfg, &dataset, seed)?;
    let train_cfg = resolve_train(&args.train, &file_cfg);
    let runs = config::resolve(args.runs, file_cfg.runs, 5);
    if runs == 0 {
        return Err(CliError::usage("--runs must be >= 1"));
    }
    let seeds: Vec<u64> = (0..runs as u64).map(|i| seed + i).collect();
    manifest.set_config(serde_json::json!({
        "model": &base, "train": &train_cfg,
        "k_values": &args.k_values, "alpha_values": &args.alpha_values, "runs": runs,
    }))?;

    let rows = manifest.time("grid_search", || {
        grid_search(&dataset, &base, &train_cfg, &args.k_values, &args.alpha_values, &seeds)
    })?;

    std::fs::create_dir_all(&common.out_dir)?;
    let out_path = args.out.clone().unwrap_or_else(|| common.out_dir.join("grid.csv"));
    let mut csv = String::from("K,alpha,mean_acc,std_acc,n_runs\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{},{}\n", r.k, r.alpha, r.mean_acc, r.std_acc, r.n_runs));
    }
    std::fs::write(&out_path, &csv)?;
    manifest.write(&common.out_dir)?;

    if common.json {
        println!("{}", serde_json::to_string(&rows)?);
    } else {
        let best = rows
            .iter()
            .max_by(|a, b| a.mean_acc.total_cmp(&b.mean_acc))
            .expect("non-empty grid");
        println!(
            "{} cells x {} runs -> {}; best K={} alpha={} (mean acc {:.4} +/- {:.4})",
            rows.len(),
            runs,
            out_path.display(),
            best.k,
            best.alpha,
            best.mean_acc,
            best.std_acc
        );
    }
    Ok(())
}
