use crate::error::{Error, Result};

use super::Volume;

/// Overlapping cubic windows over a volume. Origins are `(w, h, d)` start
/// coordinates, stride-aligned and sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchGrid {
    pub window: usize,
    pub stride: usize,
    pub origins: Vec<[usize; 3]>,
    pub source_dims: [usize; 3],
}

/// Window starts along one axis: `0, stride, 2·stride, …` up to the first
/// start `p` with `p + window ≥ len`. Overflow is zero-padded.
pub fn axis_origins(len: usize, window: usize, stride: usize) -> Vec<usize> {
    let last = len.saturating_sub(window).div_ceil(stride);
    (0..=last).map(|k| k * stride).collect()
}

impl PatchGrid {
    pub fn new(source_dims: [usize; 3], window: usize, stride: usize) -> Result<Self> {
        if stride == 0 || window < stride {
            return Err(Error::GridMismatch(format!(
                "need window ≥ stride ≥ 1, got window {window}, stride {stride}"
            )));
        }
        let [ow, oh, od] = source_dims.map(|len| axis_origins(len, window, stride));
        let mut origins = Vec::with_capacity(ow.len() * oh.len() * od.len());
        for &w in &ow {
            for &h in &oh {
                for &d in &od {
                    origins.push([w, h, d]);
                }
            }
        }
        Ok(PatchGrid { window, stride, origins, source_dims })
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn axis_counts(&self) -> [usize; 3] {
        self.source_dims.map(|len| axis_origins(len, self.window, self.stride).len())
    }

    /// The same grid expressed on a lattice `scale` times finer.
    pub fn scaled(&self, scale: usize) -> PatchGrid {
        PatchGrid {
            window: self.window * scale,
            stride: self.stride * scale,
            origins: self.origins.iter().map(|o| o.map(|c| c * scale)).collect(),
            source_dims: self.source_dims.map(|c| c * scale),
        }
    }
}

fn crop(v: &Volume, origin: [usize; 3], window: usize) -> Result<Volume> {
    let [w, h, d] = v.dims();
    let mut data = vec![0.0f32; window * window * window];
    let src = v.data();
    let wx = window.min(w.saturating_sub(origin[0]));
    for z in 0..window {
        let sz = origin[2] + z;
        if sz >= d {
            break;
        }
        for y in 0..window {
            let sy = origin[1] + y;
            if sy >= h {
                break;
            }
            let s = (sz * h + sy) * w + origin[0];
            let t = (z * window + y) * window;
            data[t..t + wx].copy_from_slice(&src[s..s + wx]);
        }
    }
    Volume::new([window; 3], v.spacing(), data)
}

/// One patch per grid origin, in origin order; out-of-bounds voxels are 0.
pub fn extract_patches(v: &Volume, window: usize, stride: usize) -> Result<(PatchGrid, Vec<Volume>)> {
    let grid = PatchGrid::new(v.dims(), window, stride)?;
    let patches = grid
        .origins
        .iter()
        .map(|&o| crop(v, o, window))
        .collect::<Result<Vec<_>>>()?;
    Ok((grid, patches))
}

/// Reassembles patches produced on `grid` (at `scale`× its resolution),
/// averaging overlaps uniformly and discarding the padded margin.
pub fn stitch_patches(grid: &PatchGrid, patches: &[Volume], scale: usize) -> Result<Volume> {
    if patches.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} patches for {} origins",
            patches.len(),
            grid.len()
        )));
    }
    if scale == 0 {
        return Err(Error::GridMismatch("scale must be ≥ 1".into()));
    }
    let fine = grid.scaled(scale);
    let edge = fine.window;
    let [w, h, d] = fine.source_dims;
    let mut acc = vec![0.0f64; w * h * d];
    let mut count = vec![0u32; w * h * d];
    for (p, origin) in patches.iter().zip(&fine.origins) {
        if p.dims() != [edge; 3] {
            return Err(Error::GridMismatch(format!(
                "patch dims {:?}, expected edge {edge}",
                p.dims()
            )));
        }
        let src = p.data();
        let wx = edge.min(w.saturating_sub(origin[0]));
        for z in 0..edge.min(d.saturating_sub(origin[2])) {
            for y in 0..edge.min(h.saturating_sub(origin[1])) {
                let t = ((origin[2] + z) * h + origin[1] + y) * w + origin[0];
                let s = (z * edge + y) * edge;
                for x in 0..wx {
                    acc[t + x] += src[s + x] as f64;
                    count[t + x] += 1;
                }
            }
        }
    }
    let data = acc
        .iter()
        .zip(&count)
        .map(|(&a, &c)| if c > 0 { (a / c as f64) as f32 } else { 0.0 })
        .collect();
    let spacing = patches.first().map(Volume::spacing).unwrap_or([1.0; 3]);
    Volume::new([w, h, d], spacing, data)
}
