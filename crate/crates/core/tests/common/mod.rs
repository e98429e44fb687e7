#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisr_core::{Tensor, Volume};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize], scale: f64) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    Tensor::new(shape, data).unwrap()
}

/// Values bounded away from zero so kinks at 0 stay outside FD stencils.
pub fn random_away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n)
        .map(|_| {
            let m = rng.random_range(0.05..1.0);
            if rng.random_bool(0.5) { m } else { -m }
        })
        .collect();
    Tensor::new(shape, data).unwrap()
}

/// Direct 6-nested-loop cross-correlation used as an independent oracle.
pub fn reference_conv3d(
    x: &Tensor<f64>,
    w: &Tensor<f64>,
    b: &[f64],
    stride: usize,
    pad: usize,
) -> (Vec<usize>, Vec<f64>) {
    let s = x.shape();
    let (n, cin, d, h, wd) = (s[0], s[1], s[2], s[3], s[4]);
    let ws = w.shape();
    let (cout, k) = (ws[0], ws[2]);
    let od = (d + 2 * pad - k) / stride + 1;
    let oh = (h + 2 * pad - k) / stride + 1;
    let ow = (wd + 2 * pad - k) / stride + 1;
    let mut out = vec![0.0; n * cout * od * oh * ow];
    let xv = x.data();
    let wv = w.data();
    for ni in 0..n {
        for co in 0..cout {
            for z in 0..od {
                for y in 0..oh {
                    for xx in 0..ow {
                        let mut acc = b[co];
                        for ci in 0..cin {
                            for kz in 0..k {
                                for ky in 0..k {
                                    for kx in 0..k {
                                        let iz = (z * stride + kz) as isize - pad as isize;
                                        let iy = (y * stride + ky) as isize - pad as isize;
                                        let ix = (xx * stride + kx) as isize - pad as isize;
                                        if iz < 0 || iy < 0 || ix < 0 || iz >= d as isize || iy >= h as isize || ix >= wd as isize {
                                            continue;
                                        }
                                        let xi = (((ni * cin + ci) * d + iz as usize) * h + iy as usize) * wd + ix as usize;
                                        let wi = (((co * cin + ci) * k + kz) * k + ky) * k + kx;
                                        acc += xv[xi] * wv[wi];
                                    }
                                }
                            }
                        }
                        out[(((ni * cout + co) * od + z) * oh + y) * ow + xx] = acc;
                    }
                }
            }
        }
    }
    (vec![n, cout, od, oh, ow], out)
}

/// PSNR straight from the definition, without the identical-volume cap.
pub fn oracle_psnr(a: &Volume, b: &Volume, range: f64) -> f64 {
    let mse = a.data().iter().zip(b.data()).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum::<f64>() / a.len() as f64;
    10.0 * (range * range / mse).log10()
}

/// Mean SSIM over all fully contained `n³` windows, with two-pass window
/// moments computed voxel by voxel.
pub fn oracle_ssim(a: &Volume, b: &Volume, n: usize, range: f64) -> f64 {
    let [w, h, d] = a.dims();
    let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
    let (mut total, mut count) = (0.0, 0usize);
    for z0 in 0..=d - n {
        for y0 in 0..=h - n {
            for x0 in 0..=w - n {
                let mut xs = Vec::with_capacity(n * n * n);
                let mut ys = Vec::with_capacity(n * n * n);
                for z in z0..z0 + n {
                    for y in y0..y0 + n {
                        for x in x0..x0 + n {
                            xs.push(a.get(x, y, z) as f64);
                            ys.push(b.get(x, y, z) as f64);
                        }
                    }
                }
                let k = xs.len() as f64;
                let mx = xs.iter().sum::<f64>() / k;
                let my = ys.iter().sum::<f64>() / k;
                let vx = xs.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / k;
                let vy = ys.iter().map(|v| (v - my).powi(2)).sum::<f64>() / k;
                let cov = xs.iter().zip(&ys).map(|(p, q)| (p - mx) * (q - my)).sum::<f64>() / k;
                total += (2.0 * mx * my + c1) * (2.0 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
    }
    total / count as f64
}
