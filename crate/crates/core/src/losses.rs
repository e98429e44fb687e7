//! Objective terms of the three-player game and annealed instance noise.
//!
//! All losses are built as graph nodes so that the same expression serves
//! the forward value and every player's gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::autodiff::{Graph, NodeId, Scalar, Tensor};
use crate::error::{Error, Result};

/// Weight of the pixel term in the generator objective.
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Weight of the adversarial term in the generator objective.
pub const DEFAULT_BETA: f64 = 0.005;
/// Floor applied inside every logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

/// Mean absolute difference between `x` and `y`.
pub fn pixel_loss<T: Scalar>(g: &mut Graph<T>, x: NodeId, y: NodeId) -> Result<NodeId> {
    g.l1(x, y)
}

/// Mean absolute difference between the feature maps of `x` and `y`.
///
/// `fe` runs the feature extractor; it is called once per input so that
/// gradients reach both paths and the extractor's own parameters.
pub fn perceptual_loss<T, F>(g: &mut Graph<T>, mut fe: F, x: NodeId, y: NodeId) -> Result<NodeId>
where
    T: Scalar,
    F: FnMut(&mut Graph<T>, NodeId) -> Result<NodeId>,
{
    if g.shape(x) != g.shape(y) {
        return Err(Error::Shape(format!(
            "perceptual operands differ: {:?} vs {:?}",
            g.shape(x),
            g.shape(y)
        )));
    }
    let fx = fe(g, x)?;
    let fy = fe(g, y)?;
    g.l1(fx, fy)
}

/// Logit differences `c_real - mean(c_fake)` and `c_fake - mean(c_real)`.
fn relative_logits<T: Scalar>(g: &mut Graph<T>, c_real: NodeId, c_fake: NodeId) -> Result<(NodeId, NodeId)> {
    if g.shape(c_real) != g.shape(c_fake) {
        return Err(Error::Shape(format!(
            "critic batches differ: {:?} vs {:?}",
            g.shape(c_real),
            g.shape(c_fake)
        )));
    }
    let mean_real = g.mean(c_real);
    let mean_fake = g.mean(c_fake);
    let real_rel = g.sub(c_real, mean_fake)?;
    let fake_rel = g.sub(c_fake, mean_real)?;
    Ok((real_rel, fake_rel))
}

/// Relativistic average discriminator outputs `(D_Ra(x, y), D_Ra(y, x))`.
pub fn d_ra<T: Scalar>(g: &mut Graph<T>, c_real: NodeId, c_fake: NodeId) -> Result<(NodeId, NodeId)> {
    let (real_rel, fake_rel) = relative_logits(g, c_real, c_fake)?;
    Ok((g.sigmoid(real_rel), g.sigmoid(fake_rel)))
}

/// `-mean ln D(a) - mean ln(1 - D(b))` with `1 - sigmoid(z)` formed as
/// `sigmoid(-z)`.
fn ragan_pair<T: Scalar>(g: &mut Graph<T>, up: NodeId, down: NodeId) -> NodeId {
    let d_up = g.sigmoid(up);
    let neg = g.scale(down, -1.0);
    let d_down = g.sigmoid(neg);
    let log_up = g.log_clamped(d_up, LOG_FLOOR);
    let log_down = g.log_clamped(d_down, LOG_FLOOR);
    let a = g.mean(log_up);
    let b = g.mean(log_down);
    let s = g.add(a, b).expect("rank-0 operands");
    g.scale(s, -1.0)
}

/// Critic loss: `-mean ln D_Ra(x, y) - mean ln(1 - D_Ra(y, x))`.
pub fn ragan_d_loss<T: Scalar>(g: &mut Graph<T>, c_real: NodeId, c_fake: NodeId) -> Result<NodeId> {
    let (real_rel, fake_rel) = relative_logits(g, c_real, c_fake)?;
    Ok(ragan_pair(g, real_rel, fake_rel))
}

/// Generator loss: `-mean ln D_Ra(y, x) - mean ln(1 - D_Ra(x, y))`.
pub fn ragan_g_loss<T: Scalar>(g: &mut Graph<T>, c_real: NodeId, c_fake: NodeId) -> Result<NodeId> {
    let (real_rel, fake_rel) = relative_logits(g, c_real, c_fake)?;
    Ok(ragan_pair(g, fake_rel, real_rel))
}

/// `perc + alpha * pix + beta * ragan_g`.
pub fn generator_objective<T: Scalar>(
    g: &mut Graph<T>,
    perc: NodeId,
    pix: NodeId,
    ragan_g: NodeId,
    alpha: f64,
    beta: f64,
) -> Result<NodeId> {
    let a = g.scale(pix, alpha);
    let b = g.scale(ragan_g, beta);
    let s = g.add(perc, a)?;
    g.add(s, b)
}

/// Linearly annealed noise level `sigma0 * max(0, 1 - t / T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSchedule {
    pub sigma0: f64,
    pub total_iters: u64,
}

impl NoiseSchedule {
    pub fn new(sigma0: f64, total_iters: u64) -> Self {
        NoiseSchedule { sigma0, total_iters }
    }

    pub fn sigma(&self, iter: u64) -> f64 {
        if self.total_iters == 0 || iter >= self.total_iters {
            return 0.0;
        }
        let frac = iter as f64 / self.total_iters as f64;
        (self.sigma0 * (1.0 - frac)).max(0.0)
    }
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        NoiseSchedule { sigma0: 1.0, total_iters: 2000 }
    }
}

/// Which tensor a noise draw belongs to; real and fake batches get
/// independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseRole {
    Real = 1,
    Fake = 2,
}

/// Generator keyed by `(seed, iter, role)`, independent of call order.
pub fn keyed_rng(seed: u64, iter: u64, role: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&iter.to_le_bytes());
    key[16..24].copy_from_slice(&role.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Gaussian noise of std `sigma(iter)` shaped like `shape`, or `None` when
/// the schedule has reached zero.
pub fn instance_noise<T: Scalar>(
    shape: &[usize],
    schedule: &NoiseSchedule,
    iter: u64,
    seed: u64,
    role: NoiseRole,
) -> Result<Option<Tensor<T>>> {
    let sigma = schedule.sigma(iter);
    if sigma == 0.0 {
        return Ok(None);
    }
    let mut rng = keyed_rng(seed, iter, role as u64);
    let mut t = Tensor::<T>::zeros(shape)?;
    for v in t.data_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = T::from_f64(sigma * z);
    }
    Ok(Some(t))
}

/// `t + eps` with `eps ~ N(0, sigma(iter)^2)` drawn elementwise.
pub fn add_instance_noise<T: Scalar>(
    t: &Tensor<T>,
    schedule: &NoiseSchedule,
    iter: u64,
    seed: u64,
    role: NoiseRole,
) -> Result<Tensor<T>> {
    let mut out = t.clone();
    out.set_requires_grad(false);
    if let Some(eps) = instance_noise::<T>(t.shape(), schedule, iter, seed, role)? {
        for (o, e) in out.data_mut().iter_mut().zip(eps.data()) {
            *o = *o + *e;
        }
    }
    Ok(out)
}
