use std::collections::VecDeque;
use std::path::Path;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::losses::NoiseSchedule;
use crate::networks::checkpoint::{self, TensorMap};
use crate::networks::{
    build_critic, build_feature_extractor, build_generator, export_params, import_params, Critic,
    FeatureExtractor, Generator, NetworkSpec, ParameterSet, Player,
};

use super::adam::AdamState;
use super::TrainingConfig;

/// The three networks (architecture only; weights live in [`TrainerState`]).
#[derive(Debug, Clone)]
pub struct Players {
    pub generator: Generator,
    pub critic: Critic,
    pub feature_extractor: FeatureExtractor,
}

impl Players {
    pub fn new(cfg: &TrainingConfig) -> Result<Self> {
        Ok(Players {
            generator: Generator::new(cfg.generator.clone())?,
            critic: Critic::new(cfg.critic.clone())?,
            feature_extractor: FeatureExtractor::new(cfg.feature_extractor.clone())?,
        })
    }
}

/// Loss values of one training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Iteration index the step ran at (σ was evaluated here).
    pub iter: u64,
    pub sigma: f64,
    pub l_pixel: f64,
    pub l_perc: f64,
    pub l_g_ragan: f64,
    pub l_d_ragan: f64,
    pub l_g_total: f64,
}

impl StepReport {
    pub const CSV_HEADER: &'static str = "iter,sigma,l_pixel,l_perc,l_g_ragan,l_d_ragan,l_g_total";

    /// One CSV row; values use the shortest exact decimal form.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.iter, self.sigma, self.l_pixel, self.l_perc, self.l_g_ragan, self.l_d_ragan, self.l_g_total
        )
    }
}

/// Most recent step reports, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct LossHistory {
    capacity: usize,
    items: VecDeque<StepReport>,
}

impl LossHistory {
    pub fn new(capacity: usize) -> Self {
        LossHistory { capacity: capacity.max(1), items: VecDeque::new() }
    }

    pub fn push(&mut self, r: StepReport) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(r);
    }

    pub fn iter(&self) -> impl Iterator<Item = &StepReport> {
        self.items.iter()
    }

    pub fn last(&self) -> Option<&StepReport> {
        self.items.back()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Everything needed to continue a run bit-for-bit. Noise and batch order are
/// derived from `(seed, iteration)`, so no generator state is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainerState {
    pub iteration: u64,
    pub seed: u64,
    pub theta: ParameterSet<f32>,
    pub psi: ParameterSet<f32>,
    pub phi: ParameterSet<f32>,
    pub adam_theta: AdamState<f32>,
    pub adam_psi: AdamState<f32>,
    pub adam_phi: AdamState<f32>,
    pub schedule: NoiseSchedule,
    /// Not persisted; the loss CSV is the durable record.
    pub history: LossHistory,
}

const HISTORY: usize = 1000;

/// Stores a `u64` exactly as four 16-bit limbs.
fn u64_tensor(v: u64) -> Tensor<f32> {
    let limbs = (0..4).map(|i| ((v >> (16 * i)) & 0xffff) as f32).collect();
    Tensor::new(&[4], limbs).expect("fixed shape")
}

fn tensor_u64(map: &TensorMap, key: &str) -> Result<u64> {
    let t = map.get(key).ok_or_else(|| Error::Checkpoint(format!("missing `{key}`")))?;
    if t.shape() != [4] {
        return Err(Error::Checkpoint(format!("`{key}` must hold 4 limbs")));
    }
    t.data().iter().enumerate().try_fold(0u64, |acc, (i, &l)| {
        if l.fract() != 0.0 || !(0.0..65536.0).contains(&l) {
            return Err(Error::Checkpoint(format!("`{key}` has invalid limb {l}")));
        }
        Ok(acc | (l as u64) << (16 * i))
    })
}

fn export_adam(st: &AdamState<f32>, params: &ParameterSet<f32>, prefix: &str, out: &mut TensorMap) {
    for (name, p) in params.iter() {
        for (kind, src) in [("m", &st.m), ("v", &st.v)] {
            let t = Tensor::new(p.shape(), src[name].clone()).expect("moment shapes match parameters");
            out.insert(format!("adam/{prefix}/{kind}/{name}"), t);
        }
    }
    out.insert(format!("meta/adam_t/{prefix}"), u64_tensor(st.t));
}

fn import_adam(map: &TensorMap, params: &ParameterSet<f32>, prefix: &str) -> Result<AdamState<f32>> {
    let mut st = AdamState::new(params);
    for (name, p) in params.iter() {
        for (kind, dst) in [("m", &mut st.m), ("v", &mut st.v)] {
            let key = format!("adam/{prefix}/{kind}/{name}");
            let t = map.get(&key).ok_or_else(|| Error::Checkpoint(format!("missing `{key}`")))?;
            if t.shape() != p.shape() {
                return Err(Error::Checkpoint(format!("`{key}` shape {:?} != {:?}", t.shape(), p.shape())));
            }
            dst.insert(name.to_string(), t.data().to_vec());
        }
    }
    st.t = tensor_u64(map, &format!("meta/adam_t/{prefix}"))?;
    Ok(st)
}

impl TrainerState {
    /// Freshly initialized players and optimizer state for `cfg`.
    pub fn init(cfg: &TrainingConfig) -> Result<(Players, TrainerState)> {
        cfg.validate()?;
        let (generator, theta) = build_generator(cfg.generator.clone(), cfg.seed.wrapping_mul(3).wrapping_add(1))?;
        let (critic, psi) = build_critic(cfg.critic.clone(), cfg.seed.wrapping_mul(3).wrapping_add(2))?;
        let (feature_extractor, phi) =
            build_feature_extractor(cfg.feature_extractor.clone(), cfg.seed.wrapping_mul(3).wrapping_add(3))?;
        let state = TrainerState {
            iteration: 0,
            seed: cfg.seed,
            adam_theta: AdamState::new(&theta),
            adam_psi: AdamState::new(&psi),
            adam_phi: AdamState::new(&phi),
            theta,
            psi,
            phi,
            schedule: NoiseSchedule::new(cfg.sigma0, cfg.total_iters),
            history: LossHistory::new(HISTORY),
        };
        Ok((Players { generator, critic, feature_extractor }, state))
    }

    pub fn to_tensor_map(&self) -> TensorMap {
        let mut map = TensorMap::new();
        for (params, adam) in [(&self.theta, &self.adam_theta), (&self.psi, &self.adam_psi), (&self.phi, &self.adam_phi)] {
            let prefix = params.owner.prefix();
            export_params(params, prefix, &mut map);
            export_adam(adam, params, prefix, &mut map);
        }
        map.insert("meta/iteration".into(), u64_tensor(self.iteration));
        map.insert("meta/seed".into(), u64_tensor(self.seed));
        map
    }

    /// Rebuilds a state for `cfg` from a map written by
    /// [`to_tensor_map`](Self::to_tensor_map); shapes must match `cfg`'s
    /// networks.
    pub fn from_tensor_map(map: &TensorMap, cfg: &TrainingConfig) -> Result<(Players, TrainerState)> {
        let players = Players::new(cfg)?;
        let theta = import_params(map, "theta", Player::Generator, &players.generator.param_shapes())?;
        let psi = import_params(map, "psi", Player::Critic, &players.critic.param_shapes())?;
        let phi = import_params(map, "phi", Player::FeatureExtractor, &players.feature_extractor.param_shapes())?;
        let seed = tensor_u64(map, "meta/seed")?;
        if seed != cfg.seed {
            return Err(Error::Checkpoint(format!("state was trained with seed {seed}, config has {}", cfg.seed)));
        }
        let state = TrainerState {
            iteration: tensor_u64(map, "meta/iteration")?,
            seed,
            adam_theta: import_adam(map, &theta, "theta")?,
            adam_psi: import_adam(map, &psi, "psi")?,
            adam_phi: import_adam(map, &phi, "phi")?,
            theta,
            psi,
            phi,
            schedule: NoiseSchedule::new(cfg.sigma0, cfg.total_iters),
            history: LossHistory::new(HISTORY),
        };
        Ok((players, state))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::save(path, &self.to_tensor_map())
    }

    pub fn load(path: &Path, cfg: &TrainingConfig) -> Result<(Players, TrainerState)> {
        Self::from_tensor_map(&checkpoint::load(path)?, cfg)
    }
}

const GENERATOR_META: &str = "meta/generator";

/// Generator weights plus its architecture, enough to run inference.
pub fn generator_checkpoint(spec: &NetworkSpec, theta: &ParameterSet<f32>) -> TensorMap {
    let mut map = TensorMap::new();
    export_params(theta, "theta", &mut map);
    let meta = [spec.base_channels, spec.growth_channels, spec.num_rrdb, spec.scale, spec.input_skip as usize];
    let t = Tensor::new(&[meta.len()], meta.iter().map(|&v| v as f32).collect()).expect("fixed shape");
    map.insert(GENERATOR_META.into(), t);
    map
}

pub fn save_generator(path: &Path, spec: &NetworkSpec, theta: &ParameterSet<f32>) -> Result<()> {
    checkpoint::save(path, &generator_checkpoint(spec, theta))
}

/// Reads a generator checkpoint (or a full trainer state, whose `theta/`
/// entries are used) and rebuilds the network.
pub fn load_generator(path: &Path) -> Result<(Generator, ParameterSet<f32>)> {
    let map = checkpoint::load(path)?;
    generator_from_map(&map)
}

pub fn generator_from_map(map: &TensorMap) -> Result<(Generator, ParameterSet<f32>)> {
    let meta = map
        .get(GENERATOR_META)
        .ok_or_else(|| Error::Checkpoint(format!("missing `{GENERATOR_META}`")))?;
    let v: Vec<usize> = meta.data().iter().map(|&x| x as usize).collect();
    let [base, growth, rrdb, scale, skip] = v[..] else {
        return Err(Error::Checkpoint(format!("`{GENERATOR_META}` must hold 5 values")));
    };
    let mut spec = NetworkSpec::generator(base, growth, rrdb);
    spec.scale = scale;
    spec.input_skip = skip != 0;
    let net = Generator::new(spec)?;
    let theta = import_params(map, "theta", Player::Generator, &net.param_shapes())?;
    Ok((net, theta))
}
