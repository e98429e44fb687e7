//! The three players: RRDB generator (θ), critic (ψ) and ResNet10-style
//! feature extractor (φ), plus parameter storage and checkpoints.

pub mod checkpoint;
mod critic;
mod feature;
mod generator;
mod params;
mod spec;

use std::collections::BTreeMap;

use crate::autodiff::{Scalar, Tensor};
use crate::error::{Error, Result};

pub use critic::Critic;
pub use feature::{FeatureExtractor, FE_STAGES};
pub use generator::Generator;
pub use params::{kaiming_init, Bound, ParameterSet, Player};
pub use spec::{NetworkKind, NetworkSpec, LEAKY_SLOPE, NORM_EPS, RESIDUAL_SCALE};

pub fn build_generator<T: Scalar>(spec: NetworkSpec, seed: u64) -> Result<(Generator, ParameterSet<T>)> {
    let net = Generator::new(spec)?;
    let params = net.init_params(seed)?;
    Ok((net, params))
}

pub fn build_critic<T: Scalar>(spec: NetworkSpec, seed: u64) -> Result<(Critic, ParameterSet<T>)> {
    let net = Critic::new(spec)?;
    let params = net.init_params(seed)?;
    Ok((net, params))
}

pub fn build_feature_extractor<T: Scalar>(
    spec: NetworkSpec,
    seed: u64,
) -> Result<(FeatureExtractor, ParameterSet<T>)> {
    let net = FeatureExtractor::new(spec)?;
    let params = net.init_params(seed)?;
    Ok((net, params))
}

/// Copies `params` into `out` under `"<prefix>/<name>"` keys.
pub fn export_params(params: &ParameterSet<f32>, prefix: &str, out: &mut checkpoint::TensorMap) {
    for (name, t) in params.iter() {
        let mut t = t.clone();
        t.zero_grad();
        t.set_requires_grad(false);
        out.insert(format!("{prefix}/{name}"), t);
    }
}

/// Extracts the `"<prefix>/…"` entries of `map` and checks them against the
/// expected names and shapes.
pub fn import_params(
    map: &checkpoint::TensorMap,
    prefix: &str,
    owner: Player,
    expected: &[(String, Vec<usize>)],
) -> Result<ParameterSet<f32>> {
    let mut tensors = BTreeMap::new();
    for (name, shape) in expected {
        let key = format!("{prefix}/{name}");
        let t = map.get(&key).ok_or_else(|| Error::Checkpoint(format!("missing tensor `{key}`")))?;
        if t.shape() != shape.as_slice() {
            return Err(Error::Checkpoint(format!(
                "`{key}` has shape {:?}, expected {shape:?}",
                t.shape()
            )));
        }
        tensors.insert(name.clone(), Tensor::clone(t));
    }
    Ok(ParameterSet::from_map(owner, tensors))
}
