use std::collections::BTreeMap;

use crate::autodiff::Scalar;
use crate::error::{Error, Result};
use crate::networks::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub gamma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { gamma: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moments per parameter, keyed by parameter name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState<T> {
    pub t: u64,
    pub m: BTreeMap<String, Vec<T>>,
    pub v: BTreeMap<String, Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &ParameterSet<T>) -> Self {
        let zeros = |(k, p): (&str, &crate::Tensor<T>)| (k.to_string(), vec![T::zero(); p.numel()]);
        AdamState { t: 0, m: params.iter().map(zeros).collect(), v: params.iter().map(zeros).collect() }
    }
}

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient. Fails without touching anything if a gradient is missing.
pub fn adam_step<T: Scalar>(params: &mut ParameterSet<T>, state: &mut AdamState<T>, cfg: &AdamConfig) -> Result<()> {
    for (name, p) in params.iter() {
        if p.grad().is_none() {
            return Err(Error::MissingGradient(format!("{}/{name}", params.owner.prefix())));
        }
        if state.m.get(name).map(Vec::len) != Some(p.numel()) {
            return Err(Error::Checkpoint(format!("optimizer state does not match parameter `{name}`")));
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (T::from_f64(cfg.beta1), T::from_f64(cfg.beta2));
    let (one_b1, one_b2) = (T::from_f64(1.0 - cfg.beta1), T::from_f64(1.0 - cfg.beta2));
    let bc1 = T::from_f64(1.0 - cfg.beta1.powi(t));
    let bc2 = T::from_f64(1.0 - cfg.beta2.powi(t));
    let (gamma, eps) = (T::from_f64(cfg.gamma), T::from_f64(cfg.eps));
    for (name, p) in params.iter_mut() {
        let grad = p.grad().expect("checked above").to_vec();
        let m = state.m.get_mut(name).expect("checked above");
        let v = state.v.get_mut(name).expect("checked above");
        for (((x, &g), m), v) in p.data_mut().iter_mut().zip(&grad).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + one_b1 * g;
            *v = b2 * *v + one_b2 * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *x = *x - gamma * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
