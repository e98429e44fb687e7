use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::autodiff::{Graph, NodeId, Scalar, Tensor};
use crate::error::{Error, Result};

/// Which player a parameter collection belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    /// θ
    Generator,
    /// ψ
    Critic,
    /// φ
    FeatureExtractor,
}

impl Player {
    pub fn prefix(self) -> &'static str {
        match self {
            Player::Generator => "theta",
            Player::Critic => "psi",
            Player::FeatureExtractor => "phi",
        }
    }
}

/// Named trainable tensors of one network, iterated in name order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet<T> {
    pub owner: Player,
    tensors: BTreeMap<String, Tensor<T>>,
}

/// Graph handles for a [`ParameterSet`] bound into one [`Graph`].
#[derive(Clone, Debug, Default)]
pub struct Bound {
    ids: BTreeMap<String, NodeId>,
}

impl Bound {
    pub fn get(&self, name: &str) -> Result<NodeId> {
        self.ids
            .get(name)
            .copied()
            .ok_or_else(|| Error::Checkpoint(format!("missing parameter `{name}`")))
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids.values().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, NodeId)> {
        self.ids.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, NodeId)> for Bound {
    fn from_iter<I: IntoIterator<Item = (String, NodeId)>>(iter: I) -> Self {
        Bound { ids: iter.into_iter().collect() }
    }
}

impl<T: Scalar> ParameterSet<T> {
    /// Zero-filled parameters with the given names and shapes.
    pub fn zeros(owner: Player, shapes: &[(String, Vec<usize>)]) -> Result<Self> {
        let mut tensors = BTreeMap::new();
        for (name, shape) in shapes {
            let t = Tensor::zeros(shape)?.with_grad();
            if tensors.insert(name.clone(), t).is_some() {
                return Err(Error::Checkpoint(format!("duplicate parameter `{name}`")));
            }
        }
        Ok(ParameterSet { owner, tensors })
    }

    pub fn from_map(owner: Player, tensors: BTreeMap<String, Tensor<T>>) -> Self {
        let tensors = tensors.into_iter().map(|(k, t)| (k, t.with_grad())).collect();
        ParameterSet { owner, tensors }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor<T>> {
        self.tensors.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor<T>)> {
        self.tensors.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.values().map(Tensor::numel).sum()
    }

    /// Adds every parameter to `graph` as a trainable leaf.
    pub fn bind(&self, graph: &mut Graph<T>) -> Bound {
        let ids = self.tensors.iter().map(|(k, t)| (k.clone(), graph.leaf(t))).collect();
        Bound { ids }
    }

    /// Accumulates the leaf gradients held by `graph` into the parameters.
    /// Leaves that received no gradient contribute zeros.
    pub fn accumulate_grads(&mut self, graph: &Graph<T>, bound: &Bound) -> Result<()> {
        for (name, t) in self.tensors.iter_mut() {
            let id = bound.get(name)?;
            match graph.grad(id) {
                Some(g) => t.accumulate_grad(g),
                None => t.accumulate_grad(&vec![T::zero(); t.numel()]),
            }
        }
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        self.tensors.values_mut().for_each(Tensor::zero_grad);
    }

    pub fn cast<U: Scalar>(&self) -> ParameterSet<U> {
        ParameterSet {
            owner: self.owner,
            tensors: self.tensors.iter().map(|(k, t)| (k.clone(), t.cast())).collect(),
        }
    }
}

/// Kaiming-normal initialization: conv weights `~ N(0, gain / sqrt(fan_in))`
/// with `gain = sqrt(2 / (1 + a²))` for leaky slope `a` and
/// `fan_in = Cin·k³`; biases are zero. Parameters are visited in name order,
/// so the result depends only on `seed`.
pub fn kaiming_init<T: Scalar>(params: &mut ParameterSet<T>, seed: u64, negative_slope: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gain = (2.0 / (1.0 + negative_slope * negative_slope)).sqrt();
    for (_, t) in params.iter_mut() {
        let shape = t.shape().to_vec();
        if shape.len() < 2 {
            t.data_mut().fill(T::zero());
            continue;
        }
        let fan_in: usize = shape[1..].iter().product();
        let normal = Normal::new(0.0, gain / (fan_in as f64).sqrt()).expect("positive std");
        for v in t.data_mut() {
            *v = T::from_f64(normal.sample(&mut rng));
        }
    }
}
