//! 3-D convolution kernels (cross-correlation, no kernel flip).
//!
//! The column matrix is built in cache-sized blocks of output depth slices
//! from a zero-padded copy of the input, so every copy is bounds-free.
//! Pointwise convolutions skip im2col entirely.

use std::borrow::Cow;

use crate::error::{Error, Result};

use super::scalar::{gemm, gemm_ld, Mat};
use super::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ConvGeom {
    pub n: usize,
    pub cin: usize,
    pub d: usize,
    pub h: usize,
    pub w: usize,
    pub cout: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub od: usize,
    pub oh: usize,
    pub ow: usize,
}

fn out_len(len: usize, k: usize, stride: usize, pad: usize) -> Option<usize> {
    let padded = len + 2 * pad;
    (padded >= k).then(|| (padded - k) / stride + 1)
}

impl ConvGeom {
    pub fn new(x: &[usize], weight: &[usize], stride: usize, pad: usize) -> Result<Self> {
        let [n, cin, d, h, w]: [usize; 5] = x
            .try_into()
            .map_err(|_| Error::shape(format!("conv3d input must be 5-D, got {x:?}")))?;
        let [cout, wcin, k, k2, k3]: [usize; 5] = weight
            .try_into()
            .map_err(|_| Error::shape(format!("conv3d weight must be 5-D, got {weight:?}")))?;
        if wcin != cin {
            return Err(Error::shape(format!(
                "conv3d channel mismatch: input has {cin}, weight expects {wcin}"
            )));
        }
        if k != k2 || k != k3 {
            return Err(Error::shape(format!("conv3d kernel must be cubic, got {weight:?}")));
        }
        if stride == 0 {
            return Err(Error::shape("conv3d stride must be ≥ 1"));
        }
        let too_small = || Error::shape(format!("input {x:?} too small for kernel {k} with padding {pad}"));
        let od = out_len(d, k, stride, pad).ok_or_else(too_small)?;
        let oh = out_len(h, k, stride, pad).ok_or_else(too_small)?;
        let ow = out_len(w, k, stride, pad).ok_or_else(too_small)?;
        Ok(ConvGeom { n, cin, d, h, w, cout, k, stride, pad, od, oh, ow })
    }

    pub fn out_shape(&self) -> [usize; 5] {
        [self.n, self.cout, self.od, self.oh, self.ow]
    }

    fn in_plane(&self) -> usize {
        self.d * self.h * self.w
    }

    fn out_plane(&self) -> usize {
        self.od * self.oh * self.ow
    }

    fn col_rows(&self) -> usize {
        self.cin * self.k * self.k * self.k
    }

    fn is_pointwise(&self) -> bool {
        self.k == 1 && self.stride == 1 && self.pad == 0
    }

    fn padded_dims(&self) -> [usize; 3] {
        [self.d + 2 * self.pad, self.h + 2 * self.pad, self.w + 2 * self.pad]
    }

    fn padded_plane(&self) -> usize {
        self.padded_dims().iter().product()
    }

    /// Output depth slices per im2col block.
    fn block_depth(&self) -> usize {
        let per_slice = self.col_rows() * self.oh * self.ow;
        (BLOCK_ELEMS / per_slice.max(1)).clamp(1, self.od)
    }

    fn blocks(&self) -> impl Iterator<Item = (usize, usize)> {
        let (step, od) = (self.block_depth(), self.od);
        (0..od).step_by(step).map(move |d0| (d0, (d0 + step).min(od)))
    }
}

/// Column-matrix budget per block, in elements; keeps the im2col buffer
/// cache-resident while the GEMM packs it.
const BLOCK_ELEMS: usize = 128 * 1024;

/// Copy of `x` with `pad` zeros on every spatial side; borrowed when there
/// is no padding.
fn padded<'a, T: Scalar>(g: &ConvGeom, x: &'a [T]) -> Cow<'a, [T]> {
    if g.pad == 0 {
        return Cow::Borrowed(x);
    }
    let [_, hp, wp] = g.padded_dims();
    let (p, pp) = (g.pad, g.padded_plane());
    let mut xp = vec![T::zero(); g.n * g.cin * pp];
    for (c, src) in x.chunks_exact(g.in_plane()).enumerate() {
        let dst = &mut xp[c * pp..(c + 1) * pp];
        for (dh, row) in src.chunks_exact(g.w).enumerate() {
            let at = ((dh / g.h + p) * hp + dh % g.h + p) * wp + p;
            dst[at..at + g.w].copy_from_slice(row);
        }
    }
    Cow::Owned(xp)
}

/// Adds the interior of a padded gradient into `dx`.
fn add_unpadded<T: Scalar>(g: &ConvGeom, dxp: &[T], dx: &mut [T]) {
    let [_, hp, wp] = g.padded_dims();
    let (p, pp) = (g.pad, g.padded_plane());
    for (c, dst) in dx.chunks_exact_mut(g.in_plane()).enumerate() {
        let src = &dxp[c * pp..(c + 1) * pp];
        for (dh, row) in dst.chunks_exact_mut(g.w).enumerate() {
            let at = ((dh / g.h + p) * hp + dh % g.h + p) * wp + p;
            for (d, &v) in row.iter_mut().zip(&src[at..at + g.w]) {
                *d = *d + v;
            }
        }
    }
}

/// Calls `f(col_offset, input_offset)` for every `ow`-long row of the column
/// block covering output depth slices `[od0, od1)` of one padded sample.
fn for_each_col_row(g: &ConvGeom, od0: usize, od1: usize, mut f: impl FnMut(usize, usize)) {
    let [_, hp, wp] = g.padded_dims();
    let (k, s, pp) = (g.k, g.stride, g.padded_plane());
    let mut dst = 0;
    for ci in 0..g.cin {
        for kd in 0..k {
            for kh in 0..k {
                for kw in 0..k {
                    for od in od0..od1 {
                        for oh in 0..g.oh {
                            f(dst, ci * pp + ((od * s + kd) * hp + oh * s + kh) * wp + kw);
                            dst += g.ow;
                        }
                    }
                }
            }
        }
    }
}

fn im2col<T: Scalar>(g: &ConvGeom, od0: usize, od1: usize, xp: &[T], col: &mut [T]) {
    let (ow, s) = (g.ow, g.stride);
    for_each_col_row(g, od0, od1, |dst, src| {
        let out = &mut col[dst..dst + ow];
        if s == 1 {
            out.copy_from_slice(&xp[src..src + ow]);
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = xp[src + i * s];
            }
        }
    });
}

fn col2im<T: Scalar>(g: &ConvGeom, od0: usize, od1: usize, col: &[T], dxp: &mut [T]) {
    let (ow, s) = (g.ow, g.stride);
    for_each_col_row(g, od0, od1, |src, dst| {
        let from = &col[src..src + ow];
        if s == 1 {
            for (d, &v) in dxp[dst..dst + ow].iter_mut().zip(from) {
                *d = *d + v;
            }
        } else {
            for (i, &v) in from.iter().enumerate() {
                dxp[dst + i * s] = dxp[dst + i * s] + v;
            }
        }
    });
}

pub(crate) fn conv3d_forward<T: Scalar>(
    g: &ConvGeom,
    x: &[T],
    weight: &[T],
    bias: Option<&[T]>,
    out: &mut [T],
) {
    let (kr, plane, slice) = (g.col_rows(), g.out_plane(), g.oh * g.ow);
    let pointwise = g.is_pointwise();
    let xp = padded(g, x);
    let pp = if pointwise { g.in_plane() } else { g.padded_plane() };
    let mut col = vec![T::zero(); if pointwise { 0 } else { kr * g.block_depth() * slice }];
    let wmat = Mat::new(weight, g.cout, kr);
    for ni in 0..g.n {
        let xs = &xp[ni * g.cin * pp..(ni + 1) * g.cin * pp];
        let os = &mut out[ni * g.cout * plane..(ni + 1) * g.cout * plane];
        let beta = match bias {
            Some(b) => {
                for (co, chunk) in os.chunks_exact_mut(plane).enumerate() {
                    chunk.fill(b[co]);
                }
                T::one()
            }
            None => T::zero(),
        };
        if pointwise {
            gemm(wmat, Mat::new(xs, kr, plane), beta, os);
            continue;
        }
        for (d0, d1) in g.blocks() {
            let bp = (d1 - d0) * slice;
            im2col(g, d0, d1, xs, &mut col);
            gemm_ld(wmat, Mat::new(&col[..kr * bp], kr, bp), beta, &mut os[d0 * slice..], plane);
        }
    }
}

/// Accumulates (+=) gradients for whichever of `dx`, `dw`, `db` are requested.
pub(crate) fn conv3d_backward<T: Scalar>(
    g: &ConvGeom,
    x: &[T],
    weight: &[T],
    dout: &[T],
    mut dx: Option<&mut [T]>,
    mut dw: Option<&mut [T]>,
    mut db: Option<&mut [T]>,
) {
    let (kr, plane, slice) = (g.col_rows(), g.out_plane(), g.oh * g.ow);
    let pointwise = g.is_pointwise();
    let pp = if pointwise { g.in_plane() } else { g.padded_plane() };
    let xp = if dw.is_some() { padded(g, x) } else { Cow::Borrowed(&[][..]) };
    let buf = if pointwise { 0 } else { kr * g.block_depth() * slice };
    let mut col = vec![T::zero(); if dw.is_some() { buf } else { 0 }];
    let mut dcol = vec![T::zero(); if dx.is_some() { buf } else { 0 }];
    let mut dxp = vec![T::zero(); if dx.is_some() && !pointwise { g.n * g.cin * pp } else { 0 }];
    let wmat = Mat::new(weight, g.cout, kr);
    for ni in 0..g.n {
        let gs = &dout[ni * g.cout * plane..(ni + 1) * g.cout * plane];
        if let Some(db) = db.as_deref_mut() {
            for (co, chunk) in gs.chunks_exact(plane).enumerate() {
                db[co] = chunk.iter().fold(db[co], |acc, &v| acc + v);
            }
        }
        let sample = ni * g.cin * pp..(ni + 1) * g.cin * pp;
        if pointwise {
            if let Some(dw) = dw.as_deref_mut() {
                gemm(Mat::new(gs, g.cout, plane), Mat::new(&xp[sample.clone()], kr, plane).t(), T::one(), dw);
            }
            if let Some(dx) = dx.as_deref_mut() {
                gemm(wmat.t(), Mat::new(gs, g.cout, plane), T::one(), &mut dx[sample]);
            }
            continue;
        }
        for (d0, d1) in g.blocks() {
            let bp = (d1 - d0) * slice;
            let gblk = Mat::strided(&gs[d0 * slice..], g.cout, bp, plane);
            if let Some(dw) = dw.as_deref_mut() {
                im2col(g, d0, d1, &xp[sample.clone()], &mut col);
                gemm(gblk, Mat::new(&col[..kr * bp], kr, bp).t(), T::one(), dw);
            }
            if dx.is_some() {
                gemm(wmat.t(), gblk, T::zero(), &mut dcol[..kr * bp]);
                col2im(g, d0, d1, &dcol, &mut dxp[sample.clone()]);
            }
        }
    }
    if let (Some(dx), false) = (dx, pointwise) {
        add_unpadded(g, &dxp, dx);
    }
}
