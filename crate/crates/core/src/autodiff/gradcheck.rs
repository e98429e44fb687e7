//! Central finite-difference gradient checking in `f64`.

use crate::error::Result;

use super::{Graph, NodeId, Tensor};

#[derive(Clone, Debug, PartialEq)]
pub struct GradReport {
    /// Largest `|autodiff − fd| / max(|autodiff|, |fd|, 1e-6)` over checked elements.
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub checked: usize,
    /// Elements skipped because a kink (tie point) lies within `±h`.
    pub skipped_kinks: usize,
    pub passed: bool,
}

const REL_FLOOR: f64 = 1e-6;

fn eval<F>(f: &F, inputs: &[Tensor<f64>]) -> Result<f64>
where
    F: Fn(&mut Graph<f64>, &[NodeId]) -> Result<NodeId>,
{
    let mut g = Graph::new();
    let ids: Vec<NodeId> = inputs.iter().map(|t| g.leaf(t)).collect();
    let out = f(&mut g, &ids)?;
    Ok(g.item(out))
}

/// Compares the autodiff gradient of the scalar function `f` against central
/// differences `(f(x+h·e) − f(x−h·e)) / 2h` for every element of every input
/// that requires a gradient.
///
/// An element is treated as a tie point and skipped when its one-sided
/// difference quotients disagree by more than `kink_tol` relative to their
/// magnitude, which happens only when a non-differentiable point lies inside
/// the stencil.
pub fn grad_check<F>(f: F, inputs: &[Tensor<f64>], h: f64, tol: f64) -> Result<GradReport>
where
    F: Fn(&mut Graph<f64>, &[NodeId]) -> Result<NodeId>,
{
    grad_check_with_kinks(f, inputs, h, tol, f64::INFINITY)
}

pub fn grad_check_with_kinks<F>(
    f: F,
    inputs: &[Tensor<f64>],
    h: f64,
    tol: f64,
    kink_tol: f64,
) -> Result<GradReport>
where
    F: Fn(&mut Graph<f64>, &[NodeId]) -> Result<NodeId>,
{
    let mut g = Graph::new();
    let ids: Vec<NodeId> = inputs.iter().map(|t| g.leaf(t)).collect();
    let out = f(&mut g, &ids)?;
    let f0 = g.item(out);
    g.backward(out)?;
    let analytic: Vec<Option<Vec<f64>>> = ids
        .iter()
        .zip(inputs)
        .map(|(&id, t)| {
            t.requires_grad()
                .then(|| g.grad(id).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; t.numel()]))
        })
        .collect();
    drop(g);

    let mut report = GradReport {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        checked: 0,
        skipped_kinks: 0,
        passed: true,
    };
    let mut work = inputs.to_vec();
    for (ti, grads) in analytic.iter().enumerate() {
        let Some(grads) = grads else { continue };
        for (ei, &a) in grads.iter().enumerate() {
            let orig = work[ti].data()[ei];
            work[ti].data_mut()[ei] = orig + h;
            let fp = eval(&f, &work)?;
            work[ti].data_mut()[ei] = orig - h;
            let fm = eval(&f, &work)?;
            work[ti].data_mut()[ei] = orig;

            if kink_tol.is_finite() {
                let fwd = (fp - f0) / h;
                let bwd = (f0 - fm) / h;
                let scale = fwd.abs().max(bwd.abs()).max(REL_FLOOR);
                if (fwd - bwd).abs() / scale > kink_tol {
                    report.skipped_kinks += 1;
                    continue;
                }
            }
            let numeric = (fp - fm) / (2.0 * h);
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(REL_FLOOR);
            report.max_abs_err = report.max_abs_err.max(abs);
            report.max_rel_err = report.max_rel_err.max(rel);
            report.checked += 1;
        }
    }
    report.passed = report.max_rel_err < tol;
    Ok(report)
}
