use crate::autodiff::{Graph, NodeId, Scalar};
use crate::error::{Error, Result};

use super::generator::conv;
use super::params::{kaiming_init, Bound, ParameterSet, Player};
use super::spec::{NetworkKind, NetworkSpec, LEAKY_SLOPE};

/// Number of residual stages of the ResNet10 trunk.
pub const FE_STAGES: usize = 4;

/// Convolutional trunk of a ResNet10 (one BasicBlock per stage, widths
/// `c, 2c, 4c, 8c`, stride 2 on stages 2–4 with 1³ projections). Returns
/// the last feature map; there is no pooling or linear head.
#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    spec: NetworkSpec,
}

impl FeatureExtractor {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        if spec.kind != NetworkKind::FeatureExtractor {
            return Err(Error::Config("not a feature-extractor spec".into()));
        }
        spec.validate()?;
        Ok(FeatureExtractor { spec })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    fn widths(&self) -> [usize; FE_STAGES] {
        let c = self.spec.base_channels;
        [c, 2 * c, 4 * c, 8 * c]
    }

    pub fn output_channels(&self) -> usize {
        self.widths()[FE_STAGES - 1]
    }

    pub fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        let mut push = |name: String, cout: usize, cin: usize, k: usize| {
            out.push((format!("{name}.weight"), vec![cout, cin, k, k, k]));
            out.push((format!("{name}.bias"), vec![cout]));
        };
        let w = self.widths();
        push("stem".into(), w[0], 1, 3);
        let mut cin = w[0];
        for (s, &c) in w.iter().enumerate() {
            push(format!("layer{s}.conv0"), c, cin, 3);
            push(format!("layer{s}.conv1"), c, c, 3);
            if s > 0 {
                push(format!("layer{s}.proj"), c, cin, 1);
            }
            cin = c;
        }
        out
    }

    pub fn init_params<T: Scalar>(&self, seed: u64) -> Result<ParameterSet<T>> {
        let mut p = ParameterSet::zeros(Player::FeatureExtractor, &self.param_shapes())?;
        kaiming_init(&mut p, seed, LEAKY_SLOPE);
        Ok(p)
    }

    /// `[N, 1, d, h, w] → [N, 8c, d/8, h/8, w/8]`.
    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Bound, x: NodeId) -> Result<NodeId> {
        let shape = g.shape(x).to_vec();
        if shape.len() != 5 || shape[1] != 1 {
            return Err(Error::shape(format!("feature extractor expects [N, 1, d, h, w], got {shape:?}")));
        }
        if shape[2..].iter().any(|&s| s < 16) {
            return Err(Error::shape(format!("feature extractor input {shape:?} smaller than 16³")));
        }
        let stem = conv(g, p, "stem", x, 1, 1, true)?;
        let mut t = g.leaky_relu(stem, LEAKY_SLOPE);
        for s in 0..FE_STAGES {
            let stride = if s == 0 { 1 } else { 2 };
            let name = format!("layer{s}");
            let y = conv(g, p, &format!("{name}.conv0"), t, stride, 1, true)?;
            let y = g.leaky_relu(y, LEAKY_SLOPE);
            let y = conv(g, p, &format!("{name}.conv1"), y, 1, 1, true)?;
            let skip = if s == 0 { t } else { conv(g, p, &format!("{name}.proj"), t, stride, 0, true)? };
            let sum = g.add(y, skip)?;
            t = g.leaky_relu(sum, LEAKY_SLOPE);
        }
        Ok(t)
    }
}
