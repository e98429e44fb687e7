use crate::error::{Error, Result};

use super::Volume;

/// Halves every axis by trilinear interpolation with voxel-center alignment:
/// output voxel `v` samples input coordinate `2v + 0.5`, which is the mean
/// of the `2×2×2` block it covers. Spacing doubles.
pub fn downsample_half(v: &Volume) -> Result<Volume> {
    let [w, h, d] = v.dims();
    for (axis, len) in [w, h, d].into_iter().enumerate() {
        if len < 2 || len % 2 != 0 {
            return Err(Error::OddDimension { axis, len });
        }
    }
    let out_dims = [w / 2, h / 2, d / 2];
    let src = v.data();
    let mut data = Vec::with_capacity(out_dims.iter().product());
    for z in 0..out_dims[2] {
        for y in 0..out_dims[1] {
            for x in 0..out_dims[0] {
                let mut acc = 0.0f32;
                for dz in 0..2 {
                    for dy in 0..2 {
                        let row = ((2 * z + dz) * h + 2 * y + dy) * w + 2 * x;
                        acc += src[row] + src[row + 1];
                    }
                }
                data.push(acc * 0.125);
            }
        }
    }
    let s = v.spacing();
    Volume::new(out_dims, [s[0] * 2.0, s[1] * 2.0, s[2] * 2.0], data)
}

/// Linear interpolation taps for doubling an axis of length `n`: output
/// index `u` samples input coordinate `(u + 0.5)/2 − 0.5`, clamped to the
/// edge voxels.
fn upsample_taps(n: usize) -> Vec<(usize, usize, f32)> {
    (0..2 * n)
        .map(|u| {
            let c = ((u as f32 + 0.5) * 0.5 - 0.5).clamp(0.0, (n - 1) as f32);
            let i0 = c.floor() as usize;
            let i1 = (i0 + 1).min(n - 1);
            (i0, i1, c - i0 as f32)
        })
        .collect()
}

/// ×2 trilinear upsampling, the inverse-geometry counterpart of
/// [`downsample_half`]. Used as the interpolation baseline.
pub fn upsample_trilinear(v: &Volume) -> Result<Volume> {
    let [w, h, d] = v.dims();
    let data = upsample_trilinear_raw(v.data(), [w, h, d]);
    let s = v.spacing();
    Volume::new([2 * w, 2 * h, 2 * d], [s[0] * 0.5, s[1] * 0.5, s[2] * 0.5], data)
}

/// Raw-buffer form of [`upsample_trilinear`] for an x-fastest `(W, H, D)` grid.
pub fn upsample_trilinear_raw(src: &[f32], [w, h, d]: [usize; 3]) -> Vec<f32> {
    let (tx, ty, tz) = (upsample_taps(w), upsample_taps(h), upsample_taps(d));
    let (ow, oh, od) = (2 * w, 2 * h, 2 * d);
    // separable: x, then y, then z
    let mut bx = vec![0.0f32; ow * h * d];
    for row in 0..h * d {
        for (x, &(i0, i1, t)) in tx.iter().enumerate() {
            bx[row * ow + x] = src[row * w + i0] * (1.0 - t) + src[row * w + i1] * t;
        }
    }
    let mut by = vec![0.0f32; ow * oh * d];
    for z in 0..d {
        for (y, &(i0, i1, t)) in ty.iter().enumerate() {
            for x in 0..ow {
                let a = bx[(z * h + i0) * ow + x];
                let b = bx[(z * h + i1) * ow + x];
                by[(z * oh + y) * ow + x] = a * (1.0 - t) + b * t;
            }
        }
    }
    let plane = ow * oh;
    let mut out = vec![0.0f32; plane * od];
    for (z, &(i0, i1, t)) in tz.iter().enumerate() {
        for k in 0..plane {
            out[z * plane + k] = by[i0 * plane + k] * (1.0 - t) + by[i1 * plane + k] * t;
        }
    }
    out
}
