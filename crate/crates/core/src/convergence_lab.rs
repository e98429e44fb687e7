//! Dirac-GAN dynamics: a generator that is a point mass at `θ`, real data
//! at `0`, and a linear critic `C(x) = ψ·x`. The unique equilibrium is
//! `(θ, ψ) = (0, 0)`.
//!
//! Each step evaluates the chosen losses on `K` samples per side,
//!
//! ```text
//! real_k = 0 + ε_k,   fake_k = θ + ε'_k,   ε, ε' ~ N(0, σ(t)²)
//! c_r = ψ·real,       c_f = ψ·fake
//! ```
//!
//! and applies one simultaneous gradient step, `θ ← θ − lr·∂L_G/∂θ` and
//! `ψ ← ψ − lr·∂L_D/∂ψ`. Without noise every sample is exact and `K = 1`.
//!
//! * standard (zero-sum): `L_D = −mean ln σ(c_r) − mean ln σ(−c_f)`,
//!   `L_G = −L_D`.
//! * relativistic: the library's relativistic average losses on
//!   `(c_r, c_f)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::autodiff::{Graph, NodeId, Tensor};
use crate::error::{Error, Result};
use crate::losses::{keyed_rng, ragan_d_loss, ragan_g_loss, NoiseRole, NoiseSchedule, LOG_FLOOR};

/// Monte-Carlo samples per side when noise is active.
pub const MC_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Standard,
    Relativistic,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(LossKind::Standard),
            "ragan" | "relativistic" => Ok(LossKind::Relativistic),
            _ => Err(Error::Config(format!("loss must be standard or ragan, got `{s}`"))),
        }
    }
}

/// Whether the real and fake samples of one draw share the same `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoisePairing {
    Independent,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    None,
    Annealed(NoiseSchedule, NoisePairing),
}

impl NoiseMode {
    fn sigma(&self, step: u64) -> f64 {
        match self {
            NoiseMode::None => 0.0,
            NoiseMode::Annealed(s, _) => s.sigma(step),
        }
    }

    fn pairing(&self) -> NoisePairing {
        match self {
            NoiseMode::None => NoisePairing::Independent,
            NoiseMode::Annealed(_, p) => *p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracGanState {
    pub theta: f64,
    pub psi: f64,
    /// `(θ, ψ)` before the first step and after every step.
    pub trajectory: Vec<(f64, f64)>,
}

impl DiracGanState {
    /// Distance of the current point from the equilibrium.
    pub fn radius(&self) -> f64 {
        self.theta.hypot(self.psi)
    }

    pub fn initial_radius(&self) -> f64 {
        self.trajectory.first().map_or(0.0, |&(t, p)| t.hypot(p))
    }
}

fn samples(sigma: f64, seed: u64, step: u64, role: NoiseRole) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0];
    }
    let mut rng = keyed_rng(seed, step, role as u64);
    (0..MC_SAMPLES).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn neg_mean_log_sigmoid(g: &mut Graph<f64>, z: NodeId) -> NodeId {
    let s = g.sigmoid(z);
    let l = g.log_clamped(s, LOG_FLOOR);
    let m = g.mean(l);
    g.scale(m, -1.0)
}

/// Gradients `(∂L_G/∂θ, ∂L_D/∂ψ)` at one point for the given noise draws.
fn gradients(kind: LossKind, theta: f64, psi: f64, eps_real: &[f64], eps_fake: &[f64]) -> Result<(f64, f64)> {
    let mut g = Graph::new();
    let th = g.leaf(&Tensor::scalar(theta).with_grad());
    let ps = g.leaf(&Tensor::scalar(psi).with_grad());
    let er = g.constant(Tensor::new(&[eps_real.len()], eps_real.to_vec())?);
    let ef = g.constant(Tensor::new(&[eps_fake.len()], eps_fake.to_vec())?);
    let fake = g.add(ef, th)?;
    let c_r = g.mul(er, ps)?;
    let c_f = g.mul(fake, ps)?;
    let (l_g, l_d) = match kind {
        LossKind::Standard => {
            let neg_f = g.scale(c_f, -1.0);
            let real_term = neg_mean_log_sigmoid(&mut g, c_r);
            let fake_term = neg_mean_log_sigmoid(&mut g, neg_f);
            let l_d = g.add(real_term, fake_term)?;
            (g.scale(l_d, -1.0), l_d)
        }
        LossKind::Relativistic => (ragan_g_loss(&mut g, c_r, c_f)?, ragan_d_loss(&mut g, c_r, c_f)?),
    };
    g.backward_wrt(l_g, &[th])?;
    g.backward_wrt(l_d, &[ps])?;
    let grad = |id| g.grad(id).map_or(0.0, |v| v[0]);
    Ok((grad(th), grad(ps)))
}

/// Runs `steps` simultaneous gradient steps from `init = (θ₀, ψ₀)`.
pub fn simulate(
    kind: LossKind,
    noise: NoiseMode,
    lr: f64,
    steps: u64,
    init: (f64, f64),
    seed: u64,
) -> Result<DiracGanState> {
    if !(lr > 0.0) || steps == 0 {
        return Err(Error::Config(format!("need lr > 0 and steps ≥ 1, got lr {lr}, steps {steps}")));
    }
    let (mut theta, mut psi) = init;
    let mut trajectory = Vec::with_capacity(steps as usize + 1);
    trajectory.push(init);
    for t in 0..steps {
        let sigma = noise.sigma(t);
        let eps_real = samples(sigma, seed, t, NoiseRole::Real);
        let eps_fake = match noise.pairing() {
            NoisePairing::Independent => samples(sigma, seed, t, NoiseRole::Fake),
            NoisePairing::Shared => eps_real.clone(),
        };
        let (g_theta, g_psi) = gradients(kind, theta, psi, &eps_real, &eps_fake)?;
        theta -= lr * g_theta;
        psi -= lr * g_psi;
        trajectory.push((theta, psi));
    }
    Ok(DiracGanState { theta, psi, trajectory })
}

/// Writes the trajectory as CSV (`step,theta,psi`) to `path` and a P5 phase
/// portrait next to it with extension `pgm`.
pub fn export_trajectory(state: &DiracGanState, path: &Path) -> Result<()> {
    let mut csv = String::from("step,theta,psi\n");
    for (i, (t, p)) in state.trajectory.iter().enumerate() {
        let _ = writeln!(csv, "{i},{t},{p}");
    }
    fs::write(path, csv)?;
    fs::write(path.with_extension("pgm"), phase_portrait(&state.trajectory, 256))?;
    Ok(())
}

/// Parses a CSV written by [`export_trajectory`].
pub fn read_trajectory(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("step,theta,psi") {
        return Err(Error::Format("trajectory CSV must start with `step,theta,psi`".into()));
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{s}`")));
            match f[..] {
                [_, t, p] => Ok((parse(t)?, parse(p)?)),
                _ => Err(Error::Format(format!("bad trajectory row `{line}`"))),
            }
        })
        .collect()
}

/// `size × size` binary PGM of the trajectory in the `(θ, ψ)` plane,
/// centred on the equilibrium. Axes are grey, visited cells black.
pub fn phase_portrait(trajectory: &[(f64, f64)], size: usize) -> Vec<u8> {
    let extent = trajectory
        .iter()
        .fold(0.0f64, |m, &(t, p)| m.max(t.abs()).max(p.abs()))
        .max(1e-12)
        * 1.05;
    let mut px = vec![255u8; size * size];
    let mid = size / 2;
    for i in 0..size {
        px[mid * size + i] = 180;
        px[i * size + mid] = 180;
    }
    let to_px = |v: f64| (((v / extent + 1.0) * 0.5 * (size - 1) as f64).round() as usize).min(size - 1);
    for &(t, p) in trajectory {
        let (x, y) = (to_px(t), size - 1 - to_px(p));
        px[y * size + x] = 0;
    }
    let mut out = format!("P5\n{size} {size}\n255\n").into_bytes();
    out.extend(px);
    out
}
