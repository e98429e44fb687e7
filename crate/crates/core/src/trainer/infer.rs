use crate::autodiff::{Graph, Tensor};
use crate::error::{Error, Result};
use crate::networks::{Generator, ParameterSet};
use crate::volume_io::{extract_patches, stitch_patches, Volume};

/// Patch geometry on the HR grid (halved for the LR input) and the number
/// of worker threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferOptions {
    pub window: usize,
    pub stride: usize,
    pub threads: usize,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions { window: 16, stride: 8, threads: 1 }
    }
}

fn run_patch(gen: &Generator, theta: &ParameterSet<f32>, p: &Volume) -> Result<Volume> {
    let [w, h, d] = p.dims();
    let mut g = Graph::new();
    let bound = theta.bind(&mut g);
    let x = g.constant(Tensor::new(&[1, 1, d, h, w], p.data().to_vec())?);
    let y = gen.forward(&mut g, &bound, x)?;
    let s = p.spacing().map(|v| v / 2.0);
    Volume::new([2 * w, 2 * h, 2 * d], s, g.value(y).to_vec())
}

/// Super-resolves `volume_lr` by 2×: normalize, run the generator on
/// overlapping LR patches, stitch with uniform averaging, then map back to
/// the input's intensity range. The result does not depend on `threads`.
pub fn infer(volume_lr: &Volume, gen: &Generator, theta: &ParameterSet<f32>, opts: &InferOptions) -> Result<Volume> {
    if opts.window % 2 != 0 || opts.stride % 2 != 0 || opts.window < 8 {
        return Err(Error::Config(format!(
            "inference window/stride must be even with window ≥ 8, got {}/{}",
            opts.window, opts.stride
        )));
    }
    let (norm, range) = volume_lr.normalize()?;
    let (grid, patches) = extract_patches(&norm, opts.window / 2, opts.stride / 2)?;
    let threads = opts.threads.clamp(1, patches.len().max(1));
    let chunk = patches.len().div_ceil(threads);
    let outputs: Vec<Volume> = std::thread::scope(|s| {
        let handles: Vec<_> = patches
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|p| run_patch(gen, theta, p)).collect::<Result<Vec<_>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("inference worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    let sr = stitch_patches(&grid, &outputs, 2)?;
    Ok(range.denormalize(&sr))
}
