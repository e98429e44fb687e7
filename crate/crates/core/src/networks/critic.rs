use crate::autodiff::{Graph, NodeId, Scalar};
use crate::error::{Error, Result};

use super::generator::conv;
use super::params::{kaiming_init, Bound, ParameterSet, Player};
use super::spec::{NetworkKind, NetworkSpec, LEAKY_SLOPE, NORM_EPS};

/// Critic `C`: strided conv → instance norm → LeakyReLU per stage, global
/// mean pooling, then a 1³ conv to one logit per sample. The discriminator
/// is `D = sigmoid ∘ C`.
///
/// No layer carries a bias: stage biases are cancelled by the following
/// instance norm, and a bias on the logit cancels in every relativistic loss.
#[derive(Clone, Debug)]
pub struct Critic {
    spec: NetworkSpec,
}

impl Critic {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        if spec.kind != NetworkKind::Critic {
            return Err(Error::Config("not a critic spec".into()));
        }
        spec.validate()?;
        Ok(Critic { spec })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        let mut cin = 1;
        for (i, &(c, _)) in self.spec.stages.iter().enumerate() {
            out.push((format!("stage{i}.weight"), vec![c, cin, 3, 3, 3]));
            cin = c;
        }
        out.push(("logit.weight".into(), vec![1, cin, 1, 1, 1]));
        out
    }

    pub fn init_params<T: Scalar>(&self, seed: u64) -> Result<ParameterSet<T>> {
        let mut p = ParameterSet::zeros(Player::Critic, &self.param_shapes())?;
        kaiming_init(&mut p, seed, LEAKY_SLOPE);
        Ok(p)
    }

    /// `[N, 1, d, h, w] → [N]` logits.
    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Bound, x: NodeId) -> Result<NodeId> {
        let shape = g.shape(x).to_vec();
        if shape.len() != 5 || shape[1] != 1 {
            return Err(Error::shape(format!("critic expects [N, 1, d, h, w], got {shape:?}")));
        }
        let min = 1usize << self.spec.stages.len();
        if shape[2..].iter().any(|&s| s < min) {
            return Err(Error::shape(format!(
                "critic input {shape:?} smaller than {min}³ for {} stages",
                self.spec.stages.len()
            )));
        }
        let mut t = x;
        for (i, &(_, stride)) in self.spec.stages.iter().enumerate() {
            t = conv(g, p, &format!("stage{i}"), t, stride, 1, false)?;
            t = g.instance_norm(t, NORM_EPS)?;
            t = g.leaky_relu(t, LEAKY_SLOPE);
        }
        let pooled = g.mean_spatial(t)?;
        let logit = conv(g, p, "logit", pooled, 1, 0, false)?;
        g.reshape(logit, &[shape[0]])
    }
}
