use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::error::{Error, Result};
use crate::losses::{DEFAULT_ALPHA, DEFAULT_BETA};
use crate::networks::NetworkSpec;

/// When the three players' gradients are taken relative to the updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOrder {
    /// All gradients from one forward pass, then all updates.
    Simultaneous,
    /// φ, then θ, then ψ, each after re-running the forward pass with the
    /// players updated so far.
    Sequential,
}

impl FromStr for UpdateOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simultaneous" => Ok(UpdateOrder::Simultaneous),
            "sequential" => Ok(UpdateOrder::Sequential),
            _ => Err(Error::Config(format!("update_order must be simultaneous or sequential, got `{s}`"))),
        }
    }
}

impl UpdateOrder {
    fn as_str(self) -> &'static str {
        match self {
            UpdateOrder::Simultaneous => "simultaneous",
            UpdateOrder::Sequential => "sequential",
        }
    }
}

/// Every knob of a training run. Loaded from an INI file with `[train]`,
/// `[data]` and `[model]` sections whose keys match the field names.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Adam learning rate.
    pub gamma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Pixel-loss weight.
    pub alpha: f64,
    /// Adversarial-loss weight.
    pub beta: f64,
    pub total_iters: u64,
    pub batch_size: usize,
    /// Initial instance-noise standard deviation.
    pub sigma0: f64,
    pub seed: u64,
    /// Write a resumable state every this many iterations (0 = only at the end).
    pub checkpoint_every: u64,
    pub update_order: UpdateOrder,
    /// HR patch edge length.
    pub window: usize,
    pub stride: usize,
    pub scale: usize,
    pub generator: NetworkSpec,
    pub critic: NetworkSpec,
    pub feature_extractor: NetworkSpec,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            gamma: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            total_iters: 2000,
            batch_size: 4,
            sigma0: 1.0,
            seed: 0,
            checkpoint_every: 500,
            update_order: UpdateOrder::Simultaneous,
            window: 16,
            stride: 8,
            scale: 2,
            generator: NetworkSpec::default_generator(),
            critic: NetworkSpec::default_critic(),
            feature_extractor: NetworkSpec::default_feature_extractor(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

/// `"16:2,32:2"` → `[(16, 2), (32, 2)]`.
fn parse_stages(key: &str, value: &str) -> Result<Vec<(usize, usize)>> {
    value
        .split(',')
        .map(|s| {
            let (c, st) = s
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("`{key}` entries must be channels:stride, got `{s}`")))?;
            Ok((parse(key, c)?, parse(key, st)?))
        })
        .collect()
}

impl TrainingConfig {
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = TrainingConfig::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in props.iter() {
                cfg.set(&format!("{section}.{key}"), value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_ini_str(&std::fs::read_to_string(path)?)
    }

    /// Sets one field from a `section.key` name. A bare `key` is accepted
    /// when it is unambiguous.
    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let key = match name.split_once('.') {
            Some(("train" | "data" | "model", k)) => k,
            Some((s, _)) => return Err(Error::Config(format!("unknown section `{s}`"))),
            None => name,
        };
        match key {
            "gamma" => self.gamma = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "adam_eps" => self.adam_eps = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "total_iters" => self.total_iters = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "sigma0" => self.sigma0 = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "checkpoint_every" => self.checkpoint_every = parse(key, value)?,
            "update_order" => self.update_order = value.trim().parse()?,
            "window" => self.window = parse(key, value)?,
            "stride" => self.stride = parse(key, value)?,
            "scale" => self.scale = parse(key, value)?,
            "base_channels" => self.generator.base_channels = parse(key, value)?,
            "growth_channels" => self.generator.growth_channels = parse(key, value)?,
            "num_rrdb" => self.generator.num_rrdb = parse(key, value)?,
            "input_skip" => self.generator.input_skip = parse_bool(key, value)?,
            "critic_stages" => self.critic = NetworkSpec::critic(parse_stages(key, value)?),
            "fe_base_channels" => self.feature_extractor = NetworkSpec::feature_extractor(parse(key, value)?),
            _ => return Err(Error::Config(format!("unknown key `{name}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.gamma > 0.0) {
            return bad(format!("gamma must be > 0, got {}", self.gamma));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.adam_eps > 0.0) || self.sigma0 < 0.0 || self.alpha < 0.0 || self.beta < 0.0 {
            return bad("adam_eps must be > 0; sigma0, alpha and beta must be ≥ 0".into());
        }
        if self.scale != 2 {
            return bad(format!("scale must be 2, got {}", self.scale));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be ≥ 1".into());
        }
        if self.window < 16 || self.window % 2 != 0 {
            return bad(format!("window must be even and ≥ 16, got {}", self.window));
        }
        if self.stride == 0 || self.stride > self.window || self.stride % 2 != 0 {
            return bad(format!("stride must be even and in 1..=window, got {}", self.stride));
        }
        let depth = self.critic.stages.iter().map(|s| s.1).product::<usize>();
        if self.window < depth {
            return bad(format!("window {} smaller than the critic's total stride {depth}", self.window));
        }
        self.generator.validate()?;
        self.critic.validate()?;
        self.feature_extractor.validate()
    }

    /// The resolved configuration as an INI document that
    /// [`from_ini_str`](Self::from_ini_str) reads back unchanged.
    pub fn to_ini_string(&self) -> String {
        let stages: Vec<String> = self.critic.stages.iter().map(|(c, s)| format!("{c}:{s}")).collect();
        let mut out = String::new();
        let _ = writeln!(out, "[train]");
        for (k, v) in [
            ("gamma", self.gamma.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("adam_eps", self.adam_eps.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("total_iters", self.total_iters.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("sigma0", self.sigma0.to_string()),
            ("seed", self.seed.to_string()),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("update_order", self.update_order.as_str().to_string()),
        ] {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "\n[data]");
        let _ = writeln!(out, "window = {}\nstride = {}\nscale = {}", self.window, self.stride, self.scale);
        let _ = writeln!(out, "\n[model]");
        let g = &self.generator;
        let _ = writeln!(out, "base_channels = {}", g.base_channels);
        let _ = writeln!(out, "growth_channels = {}", g.growth_channels);
        let _ = writeln!(out, "num_rrdb = {}", g.num_rrdb);
        let _ = writeln!(out, "input_skip = {}", g.input_skip);
        let _ = writeln!(out, "critic_stages = {}", stages.join(","));
        let _ = writeln!(out, "fe_base_channels = {}", self.feature_extractor.base_channels);
        out
    }
}
