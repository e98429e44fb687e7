use rand::seq::SliceRandom;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::losses::keyed_rng;
use crate::volume_io::{downsample_half, extract_patches, Volume};

/// Stream id of the per-epoch shuffle in [`keyed_rng`].
const SHUFFLE_STREAM: u64 = 3;

/// Normalized HR training patches, sampled in a seeded per-epoch order.
#[derive(Debug, Clone)]
pub struct PatchPool {
    window: usize,
    patches: Vec<Volume>,
}

impl PatchPool {
    /// Min-max normalizes every volume and cuts it into `window³` patches.
    pub fn from_volumes(volumes: &[Volume], window: usize, stride: usize) -> Result<Self> {
        if volumes.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut patches = Vec::new();
        for v in volumes {
            let (norm, _) = v.normalize()?;
            patches.extend(extract_patches(&norm, window, stride)?.1);
        }
        Ok(PatchPool { window, patches })
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn patches(&self) -> &[Volume] {
        &self.patches
    }

    /// Pool indices for iteration `iter`. Samples are drawn without
    /// replacement from a fresh permutation per epoch, so the batch depends
    /// only on `(seed, iter)`.
    pub fn batch_indices(&self, iter: u64, batch_size: usize, seed: u64) -> Vec<usize> {
        let n = self.patches.len() as u64;
        let mut cached: Option<(u64, Vec<usize>)> = None;
        (0..batch_size as u64)
            .map(|j| {
                let k = iter * batch_size as u64 + j;
                let epoch = k / n;
                if cached.as_ref().map(|c| c.0) != Some(epoch) {
                    let mut perm: Vec<usize> = (0..self.patches.len()).collect();
                    perm.shuffle(&mut keyed_rng(seed, epoch, SHUFFLE_STREAM));
                    cached = Some((epoch, perm));
                }
                cached.as_ref().expect("just filled").1[(k % n) as usize]
            })
            .collect()
    }

    /// `[N, 1, w, w, w]` HR batch for iteration `iter`.
    pub fn batch(&self, iter: u64, batch_size: usize, seed: u64) -> Tensor<f32> {
        let w = self.window;
        let mut data = Vec::with_capacity(batch_size * w * w * w);
        for i in self.batch_indices(iter, batch_size, seed) {
            data.extend_from_slice(self.patches[i].data());
        }
        Tensor::new(&[batch_size, 1, w, w, w], data).expect("patch sizes are uniform")
    }
}

/// Halves each sample of an `[N, 1, D, H, W]` batch with [`downsample_half`].
pub fn downsample_batch(t: &Tensor<f32>) -> Result<Tensor<f32>> {
    let [n, c, d, h, w] = t.dims5()?;
    if c != 1 {
        return Err(Error::Shape(format!("expected one channel, got {c}")));
    }
    let plane = d * h * w;
    let mut data = Vec::with_capacity(t.numel() / 8);
    for s in t.data().chunks_exact(plane) {
        let v = Volume::new([w, h, d], [1.0; 3], s.to_vec())?;
        data.extend(downsample_half(&v)?.into_data());
    }
    Tensor::new(&[n, 1, d / 2, h / 2, w / 2], data)
}
