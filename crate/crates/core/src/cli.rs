//! The `nulite` command line. [`run`] takes the argument list and output
//! streams so the whole front end can be driven from tests.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
//! Reports go to stdout only when the command succeeds; per-epoch log
//! lines and warnings go to stderr as they happen.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::architectures::{count_macs, count_params, describe, params_csv, Arch};
use crate::data::{
    ingest_folder, load_native, read_ppm, resize_bilinear, save_native, synth_dataset, AugmentConfig, Dataset,
    IngestOptions, IMAGE_SIDE,
};
use crate::error::{invalid, Error, Result};
use crate::store::{load_checkpoint, read_checkpoint, save_checkpoint, write_atomic};
use crate::tensor::{Rng, Tensor4};
use crate::train::{epoch_csv, evaluate, mean_final_accuracy, train_kfold, train_split, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nulite", version, about = "Train and inspect NU-LiteNet and SqueezeNet models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the stage and layer tables of an architecture.
    Describe {
        #[arg(long)]
        arch: Arch,
        #[arg(long, default_value_t = 50)]
        classes: usize,
    },
    /// Print parameter and MAC totals.
    CountParams {
        #[arg(long)]
        arch: Arch,
        #[arg(long, default_value_t = 50)]
        classes: usize,
        /// Per-layer CSV instead of totals.
        #[arg(long)]
        csv: bool,
    },
    /// Train from scratch on a NULD file or a folder of PPM class directories.
    Train(TrainArgs),
    /// Top-1/top-5 of a checkpoint on a dataset (center crops).
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Single-image forward latency.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10)]
        repeat: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rank the classes for one image.
    Classify {
        #[arg(long)]
        model: PathBuf,
        /// A P6 PPM, or a NULD file together with --index.
        #[arg(long)]
        image: PathBuf,
        /// Sample index when --image is a NULD file.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, default_value_t = 5)]
        topk: usize,
        /// Text file with one class name per line.
        #[arg(long)]
        names: Option<PathBuf>,
    },
    /// Write a synthetic NULD dataset.
    MakeSynth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print checkpoint header metadata.
    Inspect {
        #[arg(long)]
        model: PathBuf,
        /// Emit the metadata as one JSON object.
        #[arg(long)]
        json_meta: bool,
    },
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    arch: Arch,
    /// Stratified k-fold protocol; without it the model trains and is
    /// evaluated on the whole set.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 128)]
    batch: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f32,
    #[arg(long, default_value_t = 0.9)]
    momentum: f32,
    #[arg(long, default_value_t = 0.0005)]
    weight_decay: f32,
    /// Comma-separated epochs where the rate drops by 10x. Defaults to
    /// 26,51,76, keeping only those within --epochs.
    #[arg(long, value_delimiter = ',')]
    lr_drops: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Center crops only, no random crop or flip.
    #[arg(long)]
    no_augment: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Maps a library error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut report = String::new();
    match execute(cli.command, &mut report, stderr) {
        Ok(()) => {
            let _ = stdout.write_all(report.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command, out: &mut String, log: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Describe { arch, classes } => {
            out.push_str(&describe(&arch.build(classes)?)?);
        }
        Command::CountParams { arch, classes, csv } => {
            let g = arch.build(classes)?;
            if csv {
                out.push_str(&params_csv(&g)?);
            } else {
                let p = count_params(&g)?;
                let m = count_macs(&g)?;
                writeln!(out, "architecture: {arch}").unwrap();
                writeln!(out, "classes: {classes}").unwrap();
                writeln!(out, "total params: {} ({:.2}M)", p.total_params, p.params_millions()).unwrap();
                writeln!(out, "running stats: {}", p.total_running_stats).unwrap();
                writeln!(out, "total MACs: {}", m.total_macs).unwrap();
            }
        }
        Command::Train(args) => cmd_train(args, out, log)?,
        Command::Eval { model, data } => {
            let net = load_checkpoint(&model)?;
            let ds = load_data(&data)?;
            let all: Vec<usize> = (0..ds.len()).collect();
            let (top1, top5) = evaluate(&net, &ds, &all).map_err(|e| e.at(&data))?;
            writeln!(out, "samples: {}", ds.len()).unwrap();
            writeln!(out, "top1: {top1:.6}").unwrap();
            writeln!(out, "top5: {top5:.6}").unwrap();
        }
        Command::Bench { model, repeat, seed } => cmd_bench(&model, repeat, seed, out)?,
        Command::Classify { model, image, index, topk, names } => {
            cmd_classify(&model, &image, index, topk, names.as_deref(), out, log)?
        }
        Command::MakeSynth { classes, per_class, seed, out: path } => {
            let ds = synth_dataset(classes, per_class, &mut Rng::new(seed))?;
            save_native(&ds, &path)?;
            writeln!(out, "wrote {} samples, {} classes to {}", ds.len(), ds.num_classes(), path.display()).unwrap();
        }
        Command::Inspect { model, json_meta } => {
            let meta = read_checkpoint(&model)?.meta();
            if json_meta {
                writeln!(out, "{}", meta.to_json()).unwrap();
            } else {
                writeln!(out, "arch: {}", meta.arch_id).unwrap();
                writeln!(out, "classes: {}", meta.num_classes).unwrap();
                writeln!(out, "tensors: {}", meta.tensor_count).unwrap();
                writeln!(out, "values: {}", meta.values).unwrap();
                writeln!(out, "bytes: {}", meta.bytes).unwrap();
            }
        }
    }
    Ok(())
}

/// A directory is ingested as PPM class folders, anything else read as NULD.
fn load_data(path: &Path) -> Result<Dataset> {
    if path.is_dir() {
        ingest_folder(path, &IngestOptions::default())
    } else {
        load_native(path)
    }
}

fn cmd_train(args: TrainArgs, out: &mut String, log: &mut dyn Write) -> Result<()> {
    let mut cfg = TrainConfig {
        lr0: args.lr,
        momentum: args.momentum,
        weight_decay: args.weight_decay,
        batch_size: args.batch,
        epochs: args.epochs,
        seed: args.seed,
        augment: if args.no_augment { AugmentConfig::center() } else { AugmentConfig::default() },
        ..TrainConfig::default()
    };
    match args.lr_drops {
        Some(drops) => cfg.lr_drop_epochs = drops,
        None => cfg = cfg.clamp_drops(),
    }
    cfg.validate()?;
    if args.folds.is_some_and(|k| k < 2) {
        return Err(invalid("--folds must be at least 2"));
    }

    let echo = format!(
        "lr={} momentum={} batch={} wd={} epochs={}",
        cfg.lr0, cfg.momentum, cfg.batch_size, cfg.weight_decay, cfg.epochs
    );
    writeln!(out, "{echo}").unwrap();
    let _ = writeln!(log, "{echo}");

    let ds = load_data(&args.data)?;
    let graph = args.arch.build(ds.num_classes())?;
    fs::create_dir_all(&args.out).map_err(|e| Error::from(e).at(&args.out))?;
    writeln!(out, "arch: {} classes: {} samples: {}", args.arch, ds.num_classes(), ds.len()).unwrap();

    let mut log_epoch = |prefix: &str, r: &crate::train::EpochRecord| {
        let _ = writeln!(
            log,
            "{prefix}epoch {} lr {} loss {:.6} top1 {:.4} top5 {:.4}",
            r.epoch, r.lr, r.train_loss, r.top1, r.top5
        );
    };

    match args.folds {
        None => {
            let all: Vec<usize> = (0..ds.len()).collect();
            let run = train_split(&graph, &ds, &all, &all, &cfg, &mut |r| {
                log_epoch("", r);
                ControlFlow::Continue(())
            })?;
            let model = args.out.join("model.nult");
            let csv = args.out.join("epochs.csv");
            save_checkpoint(&run.network, &model)?;
            write_atomic(&csv, epoch_csv(&run.records).as_bytes())?;
            let last = run.last().expect("at least one epoch");
            writeln!(out, "checkpoint: {}", model.display()).unwrap();
            writeln!(out, "log: {}", csv.display()).unwrap();
            writeln!(out, "final top1: {:.6}", last.top1).unwrap();
            writeln!(out, "final top5: {:.6}", last.top5).unwrap();
        }
        Some(k) => {
            let folds = train_kfold(&graph, &ds, k, &cfg, &mut |f, r| {
                log_epoch(&format!("fold {} ", f + 1), r);
                ControlFlow::Continue(())
            })?;
            for f in &folds {
                let stem = format!("fold_{:02}", f.fold + 1);
                save_checkpoint(&f.outcome.network, args.out.join(format!("{stem}.nult")))?;
                write_atomic(&args.out.join(format!("{stem}.csv")), epoch_csv(&f.outcome.records).as_bytes())?;
                let last = f.outcome.last().expect("at least one epoch");
                writeln!(out, "fold {}: top1 {:.6} top5 {:.6}", f.fold + 1, last.top1, last.top5).unwrap();
            }
            let (t1, t5) = mean_final_accuracy(&folds).expect("folds >= 2");
            writeln!(out, "mean over {k} folds: top1 {t1:.6} top5 {t5:.6}").unwrap();
        }
    }
    Ok(())
}

fn cmd_bench(model: &Path, repeat: usize, seed: u64, out: &mut String) -> Result<()> {
    if repeat == 0 {
        return Err(invalid("--repeat must be at least 1"));
    }
    let net = load_checkpoint(model)?;
    let [c, h, w] = net.graph().input_dims();
    let x = Tensor4::rand_uniform([1, c, h, w], 0.0, 1.0, &mut Rng::new(seed))?;
    for _ in 0..3 {
        net.predict(&x)?;
    }
    let mut ms: Vec<f64> = (0..repeat)
        .map(|_| {
            let t = Instant::now();
            net.predict(&x).map(|_| t.elapsed().as_secs_f64() * 1e3)
        })
        .collect::<Result<_>>()?;
    ms.sort_by(f64::total_cmp);
    let mid = ms.len() / 2;
    let median = if ms.len() % 2 == 1 { ms[mid] } else { (ms[mid - 1] + ms[mid]) / 2.0 };
    let mean = ms.iter().sum::<f64>() / ms.len() as f64;
    let macs = count_macs(net.graph())?.total_macs;
    writeln!(out, "arch: {}", net.arch()).unwrap();
    writeln!(out, "runs: {repeat} (3 warmup)").unwrap();
    writeln!(out, "min ms: {:.3}", ms[0]).unwrap();
    writeln!(out, "median ms: {median:.3}").unwrap();
    writeln!(out, "mean ms: {mean:.3}").unwrap();
    writeln!(out, "MACs: {macs}").unwrap();
    Ok(())
}

/// Loads one image as 256x256 RGB plus the class names it carries, if any.
fn load_image(path: &Path, index: usize) -> Result<(Vec<u8>, Option<Vec<String>>)> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).at(path))?;
    if bytes.starts_with(crate::data::NATIVE_MAGIC) {
        let ds = load_native(path)?;
        let s = ds.samples().get(index).ok_or_else(|| {
            Error::Data(format!("{}: sample index {index} out of range ({} samples)", path.display(), ds.len()))
        })?;
        return Ok((s.pixels.clone(), Some(ds.class_names().to_vec())));
    }
    let img = read_ppm(&bytes).map_err(|e| e.at(path))?;
    Ok((resize_bilinear(&img, IMAGE_SIDE, IMAGE_SIDE).pixels, None))
}

fn cmd_classify(
    model: &Path,
    image: &Path,
    index: usize,
    topk: usize,
    names: Option<&Path>,
    out: &mut String,
    log: &mut dyn Write,
) -> Result<()> {
    if topk == 0 {
        return Err(invalid("--topk must be at least 1"));
    }
    let net = load_checkpoint(model)?;
    let classes = net.num_classes();
    let (pixels, embedded) = load_image(image, index)?;
    let names = match names {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::from(e).at(p))?;
            Some(text.lines().map(str::to_string).filter(|l| !l.is_empty()).collect::<Vec<_>>())
        }
        None => embedded,
    };
    let names = match names {
        Some(n) if n.len() == classes => n,
        Some(n) => {
            return Err(Error::Data(format!("{} class names for a {classes}-class model", n.len())));
        }
        None => (0..classes).map(|c| format!("class_{c}")).collect(),
    };
    let k = if topk > classes {
        let _ = writeln!(log, "warning: --topk {topk} exceeds {classes} classes; showing {classes}");
        classes
    } else {
        topk
    };

    let center = AugmentConfig {
        crop: net.graph().input_dims()[1],
        ..AugmentConfig::center()
    };
    let x = crate::data::augment(&pixels, &center, &mut Rng::new(0))?;
    let probs = net.predict(&x)?;
    let mut ranked: Vec<(usize, f32)> = probs.data().iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (rank, (c, p)) in ranked.into_iter().take(k).enumerate() {
        writeln!(out, "{} {} {:.6}", rank + 1, names[c], p).unwrap();
    }
    Ok(())
}
