//! Three-player training loop: Adam updates of the generator (θ), critic (ψ)
//! and feature extractor (φ), with logging, checkpoints and exact resume.

mod adam;
mod config;
mod data;
mod infer;
mod state;

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::autodiff::{Graph, NodeId, Tensor};
use crate::error::{Error, Result};
use crate::losses::{self, NoiseRole};
use crate::networks::{Bound, ParameterSet};
use crate::volume_io::Volume;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use config::{TrainingConfig, UpdateOrder};
pub use data::{downsample_batch, PatchPool};
pub use infer::{infer, InferOptions};
pub use state::{
    generator_checkpoint, generator_from_map, load_generator, save_generator, LossHistory, Players,
    StepReport, TrainerState,
};

/// Per-step inputs that do not depend on the parameters.
struct StepInputs {
    hr: Tensor<f32>,
    lr: Tensor<f32>,
    noise_real: Option<Tensor<f32>>,
    noise_fake: Option<Tensor<f32>>,
}

/// One forward pass of all three players.
struct Forward {
    graph: Graph<f32>,
    theta: Bound,
    psi: Bound,
    phi: Bound,
    l_pixel: NodeId,
    l_perc: NodeId,
    l_g_ragan: NodeId,
    l_d_ragan: NodeId,
    l_g_total: NodeId,
}

impl Forward {
    fn run(players: &Players, state: &TrainerState, inp: &StepInputs, cfg: &TrainingConfig) -> Result<Self> {
        let mut g = Graph::new();
        let theta = state.theta.bind(&mut g);
        let psi = state.psi.bind(&mut g);
        let phi = state.phi.bind(&mut g);
        let x = g.constant(inp.hr.clone());
        let x_lr = g.constant(inp.lr.clone());
        let y = players.generator.forward(&mut g, &theta, x_lr)?;
        let l_pixel = losses::pixel_loss(&mut g, y, x)?;
        let fe = &players.feature_extractor;
        let l_perc = losses::perceptual_loss(&mut g, |g, t| fe.forward(g, &phi, t), x, y)?;
        let real_in = match &inp.noise_real {
            Some(eps) => {
                let e = g.constant(eps.clone());
                g.add(x, e)?
            }
            None => x,
        };
        let fake_in = match &inp.noise_fake {
            Some(eps) => {
                let e = g.constant(eps.clone());
                g.add(y, e)?
            }
            None => y,
        };
        let c_real = players.critic.forward(&mut g, &psi, real_in)?;
        let c_fake = players.critic.forward(&mut g, &psi, fake_in)?;
        let l_g_ragan = losses::ragan_g_loss(&mut g, c_real, c_fake)?;
        let l_d_ragan = losses::ragan_d_loss(&mut g, c_real, c_fake)?;
        let l_g_total = losses::generator_objective(&mut g, l_perc, l_pixel, l_g_ragan, cfg.alpha, cfg.beta)?;
        Ok(Forward { graph: g, theta, psi, phi, l_pixel, l_perc, l_g_ragan, l_d_ragan, l_g_total })
    }

    fn report(&self, iter: u64, sigma: f64) -> Result<StepReport> {
        let v = |id| self.graph.item(id) as f64;
        let r = StepReport {
            iter,
            sigma,
            l_pixel: v(self.l_pixel),
            l_perc: v(self.l_perc),
            l_g_ragan: v(self.l_g_ragan),
            l_d_ragan: v(self.l_d_ragan),
            l_g_total: v(self.l_g_total),
        };
        for (name, x) in [
            ("l_pixel", r.l_pixel),
            ("l_perc", r.l_perc),
            ("l_g_ragan", r.l_g_ragan),
            ("l_d_ragan", r.l_d_ragan),
            ("l_g_total", r.l_g_total),
        ] {
            if !x.is_finite() {
                return Err(Error::NonFiniteLoss { name, iteration: iter });
            }
        }
        Ok(r)
    }

    /// Backpropagates `loss` into the leaves of `players` only and copies
    /// the gradients into the matching parameter sets.
    fn gradients(&mut self, loss: NodeId, targets: &mut [(&mut ParameterSet<f32>, &Bound)]) -> Result<()> {
        let ids: Vec<NodeId> = targets.iter().flat_map(|(_, b)| b.ids()).collect();
        self.graph.backward_wrt(loss, &ids)?;
        for (params, bound) in targets.iter_mut() {
            params.accumulate_grads(&self.graph, bound)?;
        }
        Ok(())
    }
}

fn adam_config(cfg: &TrainingConfig) -> AdamConfig {
    AdamConfig { gamma: cfg.gamma, beta1: cfg.beta1, beta2: cfg.beta2, eps: cfg.adam_eps }
}

fn update(params: &mut ParameterSet<f32>, adam: &mut AdamState<f32>, cfg: &AdamConfig) -> Result<()> {
    let r = adam_step(params, adam, cfg);
    params.zero_grads();
    r
}

/// One iteration on the HR batch `[N, 1, w, w, w]`. The LR input is its
/// 2× downsampling; noise is drawn for `state.iteration`.
///
/// In simultaneous mode every gradient comes from one forward pass before
/// any parameter moves. θ and φ share the backward pass of the generator
/// objective: only the perceptual term depends on φ, so φ receives exactly
/// ∇φ L_perc.
pub fn train_step(
    players: &Players,
    state: &mut TrainerState,
    batch_hr: &Tensor<f32>,
    cfg: &TrainingConfig,
) -> Result<StepReport> {
    let iter = state.iteration;
    let sigma = state.schedule.sigma(iter);
    let shape = batch_hr.shape();
    let inputs = StepInputs {
        hr: batch_hr.clone(),
        lr: downsample_batch(batch_hr)?,
        noise_real: losses::instance_noise(shape, &state.schedule, iter, state.seed, NoiseRole::Real)?,
        noise_fake: losses::instance_noise(shape, &state.schedule, iter, state.seed, NoiseRole::Fake)?,
    };
    let adam = adam_config(cfg);
    let mut fwd = Forward::run(players, state, &inputs, cfg)?;
    let report = fwd.report(iter, sigma)?;
    match cfg.update_order {
        UpdateOrder::Simultaneous => {
            let (theta, phi, psi) = (fwd.theta.clone(), fwd.phi.clone(), fwd.psi.clone());
            fwd.gradients(fwd.l_g_total, &mut [(&mut state.theta, &theta), (&mut state.phi, &phi)])?;
            fwd.gradients(fwd.l_d_ragan, &mut [(&mut state.psi, &psi)])?;
            drop(fwd);
            update(&mut state.phi, &mut state.adam_phi, &adam)?;
            update(&mut state.theta, &mut state.adam_theta, &adam)?;
            update(&mut state.psi, &mut state.adam_psi, &adam)?;
        }
        UpdateOrder::Sequential => {
            let phi = fwd.phi.clone();
            fwd.gradients(fwd.l_perc, &mut [(&mut state.phi, &phi)])?;
            drop(fwd);
            update(&mut state.phi, &mut state.adam_phi, &adam)?;

            let mut fwd = Forward::run(players, state, &inputs, cfg)?;
            fwd.report(iter, sigma)?;
            let theta = fwd.theta.clone();
            fwd.gradients(fwd.l_g_total, &mut [(&mut state.theta, &theta)])?;
            drop(fwd);
            update(&mut state.theta, &mut state.adam_theta, &adam)?;

            let mut fwd = Forward::run(players, state, &inputs, cfg)?;
            fwd.report(iter, sigma)?;
            let psi = fwd.psi.clone();
            fwd.gradients(fwd.l_d_ragan, &mut [(&mut state.psi, &psi)])?;
            drop(fwd);
            update(&mut state.psi, &mut state.adam_psi, &adam)?;
        }
    }
    state.iteration += 1;
    state.history.push(report);
    Ok(report)
}

/// Where a run writes its artifacts and how far it goes.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Receives `config.ini`, `losses.csv`, `state.tsrc`, `generator.tsrc`
    /// and `checkpoints/state_<iter>.tsrc`. Nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    /// Continue from a saved trainer state.
    pub resume_from: Option<PathBuf>,
    /// Stop once this iteration count is reached, even if below
    /// `total_iters`.
    pub stop_after: Option<u64>,
}

pub const LOSS_CSV: &str = "losses.csv";
pub const STATE_FILE: &str = "state.tsrc";
pub const GENERATOR_FILE: &str = "generator.tsrc";
pub const FAILED_STATE_FILE: &str = "failed_state.tsrc";
pub const CONFIG_FILE: &str = "config.ini";

pub fn checkpoint_path(out_dir: &Path, iteration: u64) -> PathBuf {
    out_dir.join("checkpoints").join(format!("state_{iteration:08}.tsrc"))
}

/// Opens the loss log. On resume, rows at or past `start` are dropped so
/// the file matches an uninterrupted run.
fn open_loss_log(path: &Path, start: u64) -> Result<File> {
    let mut kept = vec![StepReport::CSV_HEADER.to_string()];
    if start > 0 && path.exists() {
        for line in BufReader::new(File::open(path)?).lines().skip(1) {
            let line = line?;
            let iter = line.split(',').next().and_then(|s| s.parse::<u64>().ok());
            if iter.is_some_and(|i| i < start) {
                kept.push(line);
            }
        }
    }
    let mut text = kept.join("\n");
    text.push('\n');
    fs::write(path, text)?;
    Ok(OpenOptions::new().append(true).open(path)?)
}

/// Runs `cfg.total_iters` iterations on patches of `dataset`, calling
/// `on_step` after each one.
pub fn train_with(
    dataset: &[Volume],
    cfg: &TrainingConfig,
    opts: &RunOptions,
    mut on_step: impl FnMut(&StepReport),
) -> Result<(Players, TrainerState)> {
    cfg.validate()?;
    let pool = PatchPool::from_volumes(dataset, cfg.window, cfg.stride)?;
    if pool.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (players, mut state) = match &opts.resume_from {
        Some(p) => TrainerState::load(p, cfg)?,
        None => TrainerState::init(cfg)?,
    };
    let mut log = match &opts.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir.join("checkpoints"))?;
            fs::write(dir.join(CONFIG_FILE), cfg.to_ini_string())?;
            Some(open_loss_log(&dir.join(LOSS_CSV), state.iteration)?)
        }
        None => None,
    };
    let end = opts.stop_after.map_or(cfg.total_iters, |s| s.min(cfg.total_iters));
    while state.iteration < end {
        let batch = pool.batch(state.iteration, cfg.batch_size, cfg.seed);
        let report = match train_step(&players, &mut state, &batch, cfg) {
            Ok(r) => r,
            Err(e @ Error::NonFiniteLoss { .. }) => {
                if let Some(dir) = &opts.out_dir {
                    state.save(&dir.join(FAILED_STATE_FILE))?;
                }
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        if let Some(f) = log.as_mut() {
            writeln!(f, "{}", report.csv_row())?;
        }
        on_step(&report);
        if let Some(dir) = &opts.out_dir {
            if cfg.checkpoint_every > 0 && state.iteration % cfg.checkpoint_every == 0 {
                state.save(&checkpoint_path(dir, state.iteration))?;
                state.save(&dir.join(STATE_FILE))?;
            }
        }
    }
    if let Some(dir) = &opts.out_dir {
        state.save(&dir.join(STATE_FILE))?;
        save_generator(&dir.join(GENERATOR_FILE), players.generator.spec(), &state.theta)?;
    }
    Ok((players, state))
}

/// [`train_with`] without artifacts or progress callback.
pub fn train(dataset: &[Volume], cfg: &TrainingConfig) -> Result<(Players, TrainerState)> {
    train_with(dataset, cfg, &RunOptions::default(), |_| {})
}
