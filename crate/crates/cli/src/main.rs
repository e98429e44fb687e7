//! `trisr`: volumetric super-resolution pipeline.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or format
//! error, 3 non-finite loss during training.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trisr_core::convergence_lab::{self, LossKind, NoiseMode, NoisePairing};
use trisr_core::losses::NoiseSchedule;
use trisr_core::metrics::{self, MetricConfig, MetricReport};
use trisr_core::trainer::{self, InferOptions, RunOptions, TrainingConfig};
use trisr_core::volume_io::{self, downsample_half, extract_patches, Volume};
use trisr_core::Error;

#[derive(Parser, Debug)]
#[command(name = "trisr", version, about = "Volumetric 2x super-resolution with a three-player relativistic GAN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a volume between NIfTI-1 (.nii) and RVOL (.rvol)
    Convert(ConvertArgs),
    /// Cut a volume into overlapping cubic patches
    Patch(PatchArgs),
    /// Halve every axis with trilinear interpolation
    Downsample(DownsampleArgs),
    /// Train the generator, critic and feature extractor
    Train(TrainArgs),
    /// Super-resolve a volume with a trained generator
    Infer(InferArgs),
    /// Compare volumes with PSNR, SSIM and NRMSE (CSV on stdout)
    Eval(EvalArgs),
    /// Simulate Dirac-GAN dynamics and export the trajectory
    Dynamics(DynamicsArgs),
}

#[derive(Args, Debug)]
struct ConvertArgs {
    /// Input volume (.nii or .rvol)
    #[arg(long = "in")]
    input: PathBuf,
    /// Output volume; format follows the extension
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PatchArgs {
    /// Input volume
    #[arg(long = "in")]
    input: PathBuf,
    /// Directory receiving patch_NNNNN.rvol and origins.csv
    #[arg(long)]
    out: PathBuf,
    /// Patch edge length in voxels
    #[arg(long, default_value_t = 64)]
    window: usize,
    /// Step between patch origins in voxels
    #[arg(long, default_value_t = 16)]
    stride: usize,
    /// Min-max normalize to [0, 1] before cutting
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug)]
struct DownsampleArgs {
    /// Input volume with even dimensions
    #[arg(long = "in")]
    input: PathBuf,
    /// Output volume
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// INI file with [train], [data] and [model] sections
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training volumes, or directories of .nii/.rvol files
    #[arg(long, required = true, num_args = 1..)]
    data: Vec<PathBuf>,
    /// Run directory for checkpoints, losses.csv and config.ini
    #[arg(long)]
    out: PathBuf,
    /// Override one config key, e.g. --set train.total_iters=500
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for --set train.total_iters=N
    #[arg(long)]
    iters: Option<u64>,
    /// Shorthand for --set train.seed=N
    #[arg(long)]
    seed: Option<u64>,
    /// Continue from a saved trainer state
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Stop once this many iterations have run in total
    #[arg(long)]
    stop_after: Option<u64>,
    /// Print a loss line every N iterations (0 = never)
    #[arg(long, default_value_t = 100)]
    log_every: u64,
}

#[derive(Args, Debug)]
struct InferArgs {
    /// Generator checkpoint (generator.tsrc or a trainer state)
    #[arg(long)]
    checkpoint: PathBuf,
    /// Low-resolution input volume
    #[arg(long = "in")]
    input: PathBuf,
    /// Super-resolved output volume
    #[arg(long)]
    out: PathBuf,
    /// Patch edge on the output grid (input patches are half this)
    #[arg(long, default_value_t = 16)]
    window: usize,
    /// Patch step on the output grid
    #[arg(long, default_value_t = 8)]
    stride: usize,
    /// Worker threads; results do not depend on this
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Reference volume
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Volumes to score against the reference; one CSV row each
    #[arg(long, required = true, num_args = 1..)]
    test: Vec<PathBuf>,
    /// Intensity range for PSNR and SSIM constants
    #[arg(long, default_value_t = 1.0)]
    data_range: f64,
    /// SSIM window edge
    #[arg(long, default_value_t = 7)]
    window: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LossArg {
    Standard,
    Ragan,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NoiseArg {
    None,
    Annealed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PairingArg {
    Shared,
    Independent,
}

#[derive(Args, Debug)]
struct DynamicsArgs {
    #[arg(long, value_enum, default_value = "standard")]
    loss: LossArg,
    #[arg(long, value_enum, default_value = "none")]
    noise: NoiseArg,
    /// Whether real and fake samples share one noise draw
    #[arg(long, value_enum, default_value = "shared")]
    pairing: PairingArg,
    /// Initial noise std (annealed linearly to 0 at the last step)
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    #[arg(long, default_value_t = 2000)]
    steps: u64,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 1.0)]
    theta0: f64,
    #[arg(long, default_value_t = 1.0)]
    psi0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving trajectory.csv and trajectory.pgm
    #[arg(long)]
    out: PathBuf,
}

fn print_resolved(section: &str, items: &[(&str, String)]) {
    eprintln!("[{section}]");
    for (k, v) in items {
        eprintln!("{k} = {v}");
    }
    eprintln!();
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

fn save(v: &Volume, path: &Path) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    volume_io::save(v, path)
}

fn convert(a: &ConvertArgs) -> Result<(), Error> {
    print_resolved("convert", &[("in", show(&a.input)), ("out", show(&a.out))]);
    let v = volume_io::load(&a.input)?;
    save(&v, &a.out)
}

fn patch(a: &PatchArgs) -> Result<(), Error> {
    print_resolved(
        "patch",
        &[
            ("in", show(&a.input)),
            ("out", show(&a.out)),
            ("window", a.window.to_string()),
            ("stride", a.stride.to_string()),
            ("normalize", a.normalize.to_string()),
        ],
    );
    let mut v = volume_io::load(&a.input)?;
    if a.normalize {
        v = v.normalize()?.0;
    }
    let (grid, patches) = extract_patches(&v, a.window, a.stride)?;
    fs::create_dir_all(&a.out)?;
    let mut csv = String::from("index,w,h,d\n");
    for (i, (p, o)) in patches.iter().zip(&grid.origins).enumerate() {
        volume_io::save(p, &a.out.join(format!("patch_{i:05}.rvol")))?;
        csv.push_str(&format!("{i},{},{},{}\n", o[0], o[1], o[2]));
    }
    fs::write(a.out.join("origins.csv"), csv)?;
    println!("{} patches", patches.len());
    Ok(())
}

fn downsample(a: &DownsampleArgs) -> Result<(), Error> {
    print_resolved("downsample", &[("in", show(&a.input)), ("out", show(&a.out))]);
    let v = volume_io::load(&a.input)?;
    save(&downsample_half(&v)?, &a.out)
}

fn is_volume_file(p: &Path) -> bool {
    matches!(p.extension().and_then(|e| e.to_str()), Some("nii" | "rvol"))
}

fn load_dataset(paths: &[PathBuf]) -> Result<Vec<Volume>, Error> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            entries.retain(|e| e.is_file() && is_volume_file(e));
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    files.iter().map(|f| volume_io::load(f)).collect()
}

fn train(a: &TrainArgs) -> Result<(), Error> {
    let mut cfg = match &a.config {
        Some(p) => TrainingConfig::load(p)?,
        None => TrainingConfig::default(),
    };
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(n) = a.iters {
        cfg.total_iters = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    eprint!("{}", cfg.to_ini_string());
    print_resolved(
        "run",
        &[
            ("data", a.data.iter().map(|p| show(p)).collect::<Vec<_>>().join(",")),
            ("out", show(&a.out)),
            ("resume", a.resume.as_deref().map_or("none".into(), show)),
            ("stop_after", a.stop_after.map_or("none".into(), |s| s.to_string())),
        ],
    );
    let dataset = load_dataset(&a.data)?;
    let opts = RunOptions { out_dir: Some(a.out.clone()), resume_from: a.resume.clone(), stop_after: a.stop_after };
    let log_every = a.log_every;
    let (_, state) = trainer::train_with(&dataset, &cfg, &opts, |r| {
        if log_every > 0 && (r.iter + 1) % log_every == 0 {
            eprintln!(
                "iter {} sigma {:.4} pixel {:.5} perc {:.5} g_ra {:.5} d_ra {:.5} g_total {:.5}",
                r.iter + 1,
                r.sigma,
                r.l_pixel,
                r.l_perc,
                r.l_g_ragan,
                r.l_d_ragan,
                r.l_g_total
            );
        }
    })?;
    println!("finished at iteration {}; outputs in {}", state.iteration, a.out.display());
    Ok(())
}

fn infer(a: &InferArgs) -> Result<(), Error> {
    print_resolved(
        "infer",
        &[
            ("checkpoint", show(&a.checkpoint)),
            ("in", show(&a.input)),
            ("out", show(&a.out)),
            ("window", a.window.to_string()),
            ("stride", a.stride.to_string()),
            ("threads", a.threads.to_string()),
        ],
    );
    let (gen, theta) = trainer::load_generator(&a.checkpoint)?;
    let lr = volume_io::load(&a.input)?;
    let opts = InferOptions { window: a.window, stride: a.stride, threads: a.threads };
    let sr = trainer::infer(&lr, &gen, &theta, &opts)?;
    save(&sr, &a.out)
}

fn eval(a: &EvalArgs) -> Result<(), Error> {
    let cfg = MetricConfig { data_range: a.data_range, window: a.window, ..MetricConfig::default() };
    print_resolved(
        "eval",
        &[
            ("ref", show(&a.reference)),
            ("data_range", cfg.data_range.to_string()),
            ("ssim_window", cfg.window.to_string()),
            ("k1", cfg.k1.to_string()),
            ("k2", cfg.k2.to_string()),
        ],
    );
    let reference = volume_io::load(&a.reference)?;
    println!("test,{}", MetricReport::CSV_HEADER);
    for t in &a.test {
        let report = metrics::evaluate(&reference, &volume_io::load(t)?, &cfg)?;
        println!("{},{}", t.display(), report.csv_row());
    }
    Ok(())
}

fn dynamics(a: &DynamicsArgs) -> Result<(), Error> {
    print_resolved(
        "dynamics",
        &[
            ("loss", format!("{:?}", a.loss).to_lowercase()),
            ("noise", format!("{:?}", a.noise).to_lowercase()),
            ("pairing", format!("{:?}", a.pairing).to_lowercase()),
            ("sigma0", a.sigma0.to_string()),
            ("steps", a.steps.to_string()),
            ("lr", a.lr.to_string()),
            ("init", format!("{},{}", a.theta0, a.psi0)),
            ("seed", a.seed.to_string()),
            ("out", show(&a.out)),
        ],
    );
    let kind = match a.loss {
        LossArg::Standard => LossKind::Standard,
        LossArg::Ragan => LossKind::Relativistic,
    };
    let pairing = match a.pairing {
        PairingArg::Shared => NoisePairing::Shared,
        PairingArg::Independent => NoisePairing::Independent,
    };
    let noise = match a.noise {
        NoiseArg::None => NoiseMode::None,
        NoiseArg::Annealed => NoiseMode::Annealed(NoiseSchedule::new(a.sigma0, a.steps), pairing),
    };
    let state = convergence_lab::simulate(kind, noise, a.lr, a.steps, (a.theta0, a.psi0), a.seed)?;
    fs::create_dir_all(&a.out)?;
    convergence_lab::export_trajectory(&state, &a.out.join("trajectory.csv"))?;
    println!("initial_radius,final_radius\n{},{}", state.initial_radius(), state.radius());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::NonFiniteLoss { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Convert(a) => convert(a),
        Command::Patch(a) => patch(a),
        Command::Downsample(a) => downsample(a),
        Command::Train(a) => train(a),
        Command::Infer(a) => infer(a),
        Command::Eval(a) => eval(a),
        Command::Dynamics(a) => dynamics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
