//! Command-line front end. `msswd --help` lists the subcommands.
//!
//! Every run writes a [`RunManifest`] as one JSON line to standard error, or
//! to the file given with `--manifest`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::buffer::ImageSrgb;
use crate::error::{Error, Result};
use crate::eval::{read_manifest, run_benchmark, AugmentKind, BenchmarkOptions};
use crate::grad::{color_transfer, recover_reference, transfer_video, OptimConfig, OptimResult};
use crate::io::{load_image, resize_bilinear, save_map_png, save_png, save_raw_map, BitDepth};
use crate::metric::{Metric, MetricConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_io() => EXIT_IO,
        Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Parser, Debug)]
#[command(name = "msswd", version, about = "Perceptual color difference between photographs")]
struct Cli {
    /// Write the run manifest here instead of standard error.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 5)]
    scales: usize,
    #[arg(long, global = true, default_value_t = crate::projections::DEFAULT_PROJECTIONS)]
    projections: usize,
    #[arg(long = "patch-side", global = true, default_value_t = crate::projections::DEFAULT_PATCH_SIDE)]
    patch_side: usize,
    /// Measure on raw sRGB values instead of CIELAB.
    #[arg(long = "no-lab", global = true)]
    no_lab: bool,
    /// Square side inputs are resized to; 0 keeps native resolution.
    #[arg(long, global = true, default_value_t = 256)]
    size: usize,
}

impl MetricArgs {
    fn config(&self) -> MetricConfig {
        MetricConfig {
            seed: self.seed,
            scales: self.scales,
            projections: self.projections,
            patch_side: self.patch_side,
            convert_to_lab: !self.no_lab,
            ..MetricConfig::default()
        }
    }

    fn size(&self) -> Option<usize> {
        (self.size > 0).then_some(self.size)
    }
}

#[derive(Args, Debug, Clone)]
struct StepArgs {
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

impl StepArgs {
    fn apply(&self, mut ocfg: OptimConfig) -> OptimConfig {
        if let Some(s) = self.steps {
            ocfg.steps = s;
        }
        if let Some(lr) = self.lr {
            ocfg.learning_rate = lr;
        }
        ocfg
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AugmentArg {
    None,
    Translate,
    Dilate,
    Flip,
}

impl AugmentArg {
    fn kind(self) -> Option<AugmentKind> {
        match self {
            AugmentArg::None => None,
            AugmentArg::Translate => Some(AugmentKind::Translate),
            AugmentArg::Dilate => Some(AugmentKind::Dilate),
            AugmentArg::Flip => Some(AugmentKind::Flip),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the color difference between two images.
    Score {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Write the per-pixel color difference map.
    Map {
        a: PathBuf,
        b: PathBuf,
        /// Colormapped 8-bit PNG.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Little-endian f32 values after an 8-byte height/width header.
        #[arg(long)]
        raw: Option<PathBuf>,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Optimize an image until it matches REF under the metric.
    Recover {
        reference: PathBuf,
        /// `noise`, `black`, or a path to an image.
        #[arg(long, default_value = "noise")]
        init: String,
        #[command(flatten)]
        step: StepArgs,
        #[arg(long)]
        out: PathBuf,
        /// Per-iteration `iteration score grad_linf` log.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Move the colors of TARGET toward those of SRC.
    Transfer {
        source: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        step: StepArgs,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Frame-wise transfer over the PNG/PNM files in FRAMEDIR, in name order.
    TransferVideo {
        source: PathBuf,
        frame_dir: PathBuf,
        #[command(flatten)]
        step: StepArgs,
        /// Output directory; frames keep their file names.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Score a CSV manifest and report STRESS, PLCC and SRCC.
    Bench {
        manifest_csv: PathBuf,
        #[arg(long, value_enum, default_value = "none")]
        augment: AugmentArg,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Time repeated evaluations of one pair.
    Timeit {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[command(flatten)]
        metric: MetricArgs,
    },
}

/// Record of one invocation with its effective configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub metric: MetricConfig,
    /// Resize side, `None` for native resolution.
    pub size: Option<usize>,
    pub seed: u64,
    pub optim: Option<OptimConfig>,
    pub init: Option<String>,
    pub augmentation: Option<AugmentKind>,
    pub repeats: Option<usize>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_ms: f64,
}

impl RunManifest {
    fn new(command: &str, args: &MetricArgs) -> Self {
        Self {
            command: command.to_string(),
            metric: args.config(),
            size: args.size(),
            seed: args.seed,
            optim: None,
            init: None,
            augmentation: None,
            repeats: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_ms: 0.0,
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let started = Instant::now();
    match execute(cli.command, out) {
        Ok(mut manifest) => {
            manifest.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            if let Err(e) = emit_manifest(&manifest, cli.manifest.as_deref(), err) {
                let _ = writeln!(err, "error: {e}");
                return exit_code(&e);
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit_manifest(manifest: &RunManifest, path: Option<&Path>, err: &mut dyn Write) -> Result<()> {
    let json = serde_json::to_string(manifest)?;
    match path {
        Some(p) => fs::write(p, json + "\n")?,
        None => writeln!(err, "{json}")?,
    }
    Ok(())
}

fn load_sized(path: &Path, size: Option<usize>) -> Result<ImageSrgb> {
    let img = load_image(path)?;
    match size {
        Some(s) => resize_bilinear(&img, s, s),
        None => Ok(img),
    }
}

fn init_image(spec: &str, like: &ImageSrgb, size: Option<usize>, seed: u64) -> Result<ImageSrgb> {
    let (h, w) = like.dims();
    match spec {
        "black" => ImageSrgb::filled(h, w, [0.0; 3]),
        "noise" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::<f64>::new(0.5, 0.2).expect("valid normal");
            ImageSrgb::from_fn(h, w, |_, _| [0, 1, 2].map(|_| normal.sample(&mut rng).clamp(0.0, 1.0)))
        }
        path => {
            let img = load_sized(Path::new(path), size)?;
            if img.dims() == (h, w) {
                Ok(img)
            } else {
                resize_bilinear(&img, h, w)
            }
        }
    }
}

/// Saves the result, then reports divergence as an error.
fn finish(result: OptimResult, path: &Path) -> Result<OptimResult> {
    save_png(&result.image, path, BitDepth::Sixteen)?;
    result.into_completed()
}

fn frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "ppm" | "pgm" | "pnm"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidConfig(format!("no PNG or PNM frames in {}", dir.display())));
    }
    Ok(files)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<RunManifest> {
    match command {
        Command::Score { a, b, metric } => {
            let mut m = RunManifest::new("score", &metric);
            let (x, y) = (load_sized(&a, m.size)?, load_sized(&b, m.size)?);
            let score = Metric::new(m.metric.clone())?.score(&x, &y)?;
            writeln!(out, "{}", score.value)?;
            m.inputs = vec![a, b];
            Ok(m)
        }
        Command::Map { a, b, out: png, raw, metric } => {
            let mut m = RunManifest::new("map", &metric);
            if png.is_none() && raw.is_none() {
                return Err(Error::InvalidConfig("map needs --out and/or --raw".into()));
            }
            let (x, y) = (load_sized(&a, m.size)?, load_sized(&b, m.size)?);
            let map = Metric::new(m.metric.clone())?.map(&x, &y)?;
            if let Some(p) = &png {
                save_map_png(&map, p)?;
            }
            if let Some(p) = &raw {
                save_raw_map(&map, p)?;
            }
            writeln!(out, "mean {} max {}", map.mean(), map.max())?;
            m.inputs = vec![a, b];
            m.outputs = png.into_iter().chain(raw).collect();
            Ok(m)
        }
        Command::Recover {
            reference,
            init,
            step,
            out: dest,
            log,
            metric,
        } => {
            let mut m = RunManifest::new("recover", &metric);
            let ocfg = step.apply(OptimConfig::recovery());
            let target = load_sized(&reference, m.size)?;
            let start = init_image(&init, &target, m.size, metric.seed)?;
            let result = recover_reference(&target, &start, &m.metric, &ocfg)?;
            if let Some(p) = &log {
                fs::write(p, result.trajectory_log())?;
            }
            let result = finish(result, &dest)?;
            writeln!(out, "initial {} final {}", result.initial_score, result.final_score)?;
            m.optim = Some(ocfg);
            m.init = Some(init);
            m.inputs = vec![reference];
            m.outputs = std::iter::once(dest).chain(log).collect();
            Ok(m)
        }
        Command::Transfer {
            source,
            target,
            step,
            out: dest,
            metric,
        } => {
            let mut m = RunManifest::new("transfer", &metric);
            let ocfg = step.apply(OptimConfig::default());
            let (src, tgt) = (load_sized(&source, m.size)?, load_sized(&target, m.size)?);
            let tgt = if tgt.dims() == src.dims() {
                tgt
            } else {
                resize_bilinear(&tgt, src.height(), src.width())?
            };
            let result = finish(color_transfer(&src, &tgt, &m.metric, &ocfg)?, &dest)?;
            writeln!(out, "initial {} final {}", result.initial_score, result.final_score)?;
            m.optim = Some(ocfg);
            m.inputs = vec![source, target];
            m.outputs = vec![dest];
            Ok(m)
        }
        Command::TransferVideo {
            source,
            frame_dir,
            step,
            out: dest,
            metric,
        } => {
            let mut m = RunManifest::new("transfer-video", &metric);
            let ocfg = step.apply(OptimConfig::default());
            let files = frame_files(&frame_dir)?;
            let frames = files
                .iter()
                .map(|p| load_sized(p, m.size))
                .collect::<Result<Vec<_>>>()?;
            let (h, w) = frames[0].dims();
            let src = load_sized(&source, m.size)?;
            let src = if src.dims() == (h, w) { src } else { resize_bilinear(&src, h, w)? };
            fs::create_dir_all(&dest)?;
            let results = transfer_video(&src, &frames, &m.metric, &ocfg)?;
            let mut diverged = None;
            for (file, result) in files.iter().zip(results) {
                let path = dest.join(file.file_stem().expect("file name")).with_extension("png");
                save_png(&result.image, &path, BitDepth::Sixteen)?;
                writeln!(out, "{} {} {}", path.display(), result.initial_score, result.final_score)?;
                if let Err(e) = result.into_completed() {
                    diverged.get_or_insert(e);
                }
                m.outputs.push(path);
            }
            if let Some(e) = diverged {
                return Err(e);
            }
            m.optim = Some(ocfg);
            m.inputs = std::iter::once(source).chain(files).collect();
            Ok(m)
        }
        Command::Bench {
            manifest_csv,
            augment,
            out: dest,
            metric,
        } => {
            let mut m = RunManifest::new("bench", &metric);
            let records = read_manifest(&manifest_csv)?;
            let opts = BenchmarkOptions {
                metric: m.metric.clone(),
                augmentation: augment.kind(),
                size: m.size,
                seed: metric.seed,
            };
            let report = run_benchmark(&records, &opts)?;
            fs::create_dir_all(&dest)?;
            let (scores, summary) = (dest.join("scores.csv"), dest.join("summary.json"));
            report.write_scores_csv(&scores)?;
            report.write_summary_json(&summary)?;
            writeln!(out, "scored {} skipped {}", report.scored, report.skipped.len())?;
            for g in &report.subgroups {
                match &g.summary {
                    Some(s) => writeln!(
                        out,
                        "{} n={} stress={:.3} plcc={:.3} srcc={:.3}",
                        g.name, g.pair_count, s.stress, s.plcc, s.srcc
                    )?,
                    None => writeln!(out, "{} n={} ({})", g.name, g.pair_count, g.note.as_deref().unwrap_or(""))?,
                }
            }
            m.augmentation = opts.augmentation;
            m.inputs = vec![manifest_csv];
            m.outputs = vec![scores, summary];
            Ok(m)
        }
        Command::Timeit { a, b, repeats, metric } => {
            let mut m = RunManifest::new("timeit", &metric);
            if repeats == 0 {
                return Err(Error::InvalidConfig("--repeats must be >= 1".into()));
            }
            let (x, y) = (load_sized(&a, m.size)?, load_sized(&b, m.size)?);
            let metric_eval = Metric::new(m.metric.clone())?;
            metric_eval.score(&x, &y)?;
            let mut times = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let t = Instant::now();
                std::hint::black_box(metric_eval.score(&x, &y)?);
                times.push(t.elapsed().as_secs_f64() * 1e3);
            }
            let mean = times.iter().sum::<f64>() / repeats as f64;
            let min = times.iter().copied().fold(f64::INFINITY, f64::min);
            writeln!(out, "mean_ms {mean:.3} min_ms {min:.3} repeats {repeats}")?;
            m.repeats = Some(repeats);
            m.inputs = vec![a, b];
            Ok(m)
        }
    }
}
