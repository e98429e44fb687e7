use crate::error::{Error, Result};

/// Slope of every LeakyReLU in the three networks.
pub const LEAKY_SLOPE: f64 = 0.2;
/// Residual scaling inside dense blocks and RRDBs.
pub const RESIDUAL_SCALE: f64 = 0.2;
pub const NORM_EPS: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetworkKind {
    Generator,
    Critic,
    FeatureExtractor,
}

/// Declarative description of one of the three networks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    pub kind: NetworkKind,
    pub base_channels: usize,
    /// Generator only.
    pub num_rrdb: usize,
    /// Generator only: intermediate width inside dense blocks.
    pub growth_channels: usize,
    /// Critic only: `(channels, stride)` per stage.
    pub stages: Vec<(usize, usize)>,
    /// Generator only: upsampling factor (always 2 here).
    pub scale: usize,
    /// Generator only: add the trilinear upsampling of the input to the
    /// output, so the network predicts a residual over interpolation.
    pub input_skip: bool,
}

impl NetworkSpec {
    pub fn generator(base_channels: usize, growth_channels: usize, num_rrdb: usize) -> Self {
        NetworkSpec {
            kind: NetworkKind::Generator,
            base_channels,
            num_rrdb,
            growth_channels,
            stages: Vec::new(),
            scale: 2,
            input_skip: true,
        }
    }

    pub fn critic(stages: Vec<(usize, usize)>) -> Self {
        NetworkSpec {
            kind: NetworkKind::Critic,
            base_channels: stages.first().map_or(0, |s| s.0),
            num_rrdb: 0,
            growth_channels: 0,
            stages,
            scale: 1,
            input_skip: false,
        }
    }

    pub fn feature_extractor(base_channels: usize) -> Self {
        NetworkSpec {
            kind: NetworkKind::FeatureExtractor,
            base_channels,
            num_rrdb: 0,
            growth_channels: 0,
            stages: Vec::new(),
            scale: 1,
            input_skip: false,
        }
    }

    pub fn default_generator() -> Self {
        Self::generator(16, 8, 3)
    }

    pub fn default_critic() -> Self {
        Self::critic(vec![(16, 2), (32, 2), (64, 2)])
    }

    pub fn default_feature_extractor() -> Self {
        Self::feature_extractor(8)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("{:?}: {m}", self.kind)));
        match self.kind {
            NetworkKind::Generator => {
                if self.scale != 2 {
                    return bad("scale must be 2");
                }
                if self.num_rrdb < 1 {
                    return bad("num_rrdb must be ≥ 1");
                }
                if self.base_channels < 1 || self.growth_channels < 1 {
                    return bad("channel counts must be ≥ 1");
                }
            }
            NetworkKind::Critic => {
                if self.stages.is_empty() {
                    return bad("at least one stage required");
                }
                if self.stages.iter().any(|&(c, s)| c < 1 || s < 1) {
                    return bad("stage channels and strides must be ≥ 1");
                }
            }
            NetworkKind::FeatureExtractor => {
                if self.base_channels < 1 {
                    return bad("base width must be ≥ 1");
                }
            }
        }
        Ok(())
    }
}
