//! Full-reference quality metrics for volumes: PSNR, 3-D SSIM and NRMSE.
//!
//! Statistics are accumulated in `f64` regardless of the voxel type.

use crate::error::{Error, Result};
use crate::volume_io::Volume;

/// Value reported for PSNR when the volumes are identical.
pub const PSNR_CAP: f64 = 99.0;

/// Settings shared by all metrics in a [`MetricReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub data_range: f64,
    /// Edge length of the cubic SSIM window.
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { data_range: 1.0, window: 7, k1: 0.01, k2: 0.03 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: f64,
    /// RMSE divided by the reference intensity range.
    pub nrmse: f64,
    pub config: MetricConfig,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "psnr,ssim,nrmse,data_range,ssim_window,k1,k2,nrmse_norm";

    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{:.6},{:.6},{:.6},{},{},{},{},range",
            self.psnr, self.ssim, self.nrmse, c.data_range, c.window, c.k1, c.k2
        )
    }
}

fn check_dims(a: &Volume, b: &Volume) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch(a.dims(), b.dims()));
    }
    Ok(())
}

fn mse(a: &Volume, b: &Volume) -> f64 {
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    sum / a.len() as f64
}

/// Peak signal-to-noise ratio in dB, capped at [`PSNR_CAP`].
pub fn psnr(reference: &Volume, test: &Volume, data_range: f64) -> Result<f64> {
    check_dims(reference, test)?;
    if !(data_range > 0.0) {
        return Err(Error::InvalidVolume(format!("data range must be positive, got {data_range}")));
    }
    let m = mse(reference, test);
    if m == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((20.0 * data_range.log10() - 10.0 * m.log10()).min(PSNR_CAP))
}

/// Root-mean-square error normalized by the reference range.
pub fn nrmse(reference: &Volume, test: &Volume) -> Result<f64> {
    check_dims(reference, test)?;
    let (lo, hi) = reference.intensity_range();
    if hi <= lo {
        return Err(Error::DegenerateRange { min: lo as f64, max: hi as f64 });
    }
    Ok(mse(reference, test).sqrt() / (hi as f64 - lo as f64))
}

/// Inclusive 3-D prefix sums with a zero border, so any box sum takes eight
/// lookups.
struct Integral {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Integral {
    fn new(dims: [usize; 3], f: impl Fn(usize) -> f64) -> Self {
        let [w, h, d] = dims;
        let (sw, sh) = (w + 1, h + 1);
        let mut data = vec![0.0; sw * sh * (d + 1)];
        for z in 0..d {
            for y in 0..h {
                let mut row = 0.0;
                for x in 0..w {
                    row += f((z * h + y) * w + x);
                    let at = ((z + 1) * sh + y + 1) * sw + x + 1;
                    data[at] = row + data[at - sw] + data[at - sw * sh] - data[at - sw - sw * sh];
                }
            }
        }
        Integral { dims, data }
    }

    fn box_sum(&self, [x, y, z]: [usize; 3], n: usize) -> f64 {
        let (sw, sh) = (self.dims[0] + 1, self.dims[1] + 1);
        let at = |x: usize, y: usize, z: usize| self.data[(z * sh + y) * sw + x];
        let (x1, y1, z1) = (x + n, y + n, z + n);
        at(x1, y1, z1) - at(x, y1, z1) - at(x1, y, z1) - at(x1, y1, z) + at(x, y, z1) + at(x, y1, z)
            + at(x1, y, z)
            - at(x, y, z)
    }
}

/// Mean SSIM over every fully contained cubic window.
///
/// Window statistics use population (1/N) moments.
pub fn ssim3d(reference: &Volume, test: &Volume, cfg: &MetricConfig) -> Result<f64> {
    check_dims(reference, test)?;
    let dims = reference.dims();
    let n = cfg.window;
    if n == 0 || dims.iter().any(|&l| l < n) {
        return Err(Error::InvalidVolume(format!("volume {dims:?} smaller than SSIM window {n}")));
    }
    let (a, b) = (reference.data(), test.data());
    let sa = Integral::new(dims, |i| a[i] as f64);
    let sb = Integral::new(dims, |i| b[i] as f64);
    let saa = Integral::new(dims, |i| (a[i] as f64) * (a[i] as f64));
    let sbb = Integral::new(dims, |i| (b[i] as f64) * (b[i] as f64));
    let sab = Integral::new(dims, |i| (a[i] as f64) * (b[i] as f64));
    let c1 = (cfg.k1 * cfg.data_range).powi(2);
    let c2 = (cfg.k2 * cfg.data_range).powi(2);
    let count = (n * n * n) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for z in 0..=dims[2] - n {
        for y in 0..=dims[1] - n {
            for x in 0..=dims[0] - n {
                let o = [x, y, z];
                let ma = sa.box_sum(o, n) / count;
                let mb = sb.box_sum(o, n) / count;
                let va = saa.box_sum(o, n) / count - ma * ma;
                let vb = sbb.box_sum(o, n) / count - mb * mb;
                let cov = sab.box_sum(o, n) / count - ma * mb;
                total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                windows += 1;
            }
        }
    }
    Ok(total / windows as f64)
}

/// All three metrics under one configuration.
pub fn evaluate(reference: &Volume, test: &Volume, cfg: &MetricConfig) -> Result<MetricReport> {
    Ok(MetricReport {
        psnr: psnr(reference, test, cfg.data_range)?,
        ssim: ssim3d(reference, test, cfg)?,
        nrmse: nrmse(reference, test)?,
        config: *cfg,
    })
}
