use crate::error::{Error, Result};

/// Dense 3-D scalar field stored x-fastest: `index = (d·H + h)·W + w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f32; 3],
    data: Vec<f32>,
    intensity_range: (f32, f32),
}

/// Original intensity range of a normalized volume, kept for inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntensityWindow {
    pub min: f32,
    pub max: f32,
}

impl IntensityWindow {
    pub fn denormalize(&self, v: &Volume) -> Volume {
        let span = self.max - self.min;
        v.map(|x| x * span + self.min)
    }
}

fn observed_range(data: &[f32]) -> (f32, f32) {
    data.iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

impl Volume {
    /// `dims` is `(W, H, D)` in voxels, `spacing` millimeters per voxel.
    pub fn new(dims: [usize; 3], spacing: [f32; 3], data: Vec<f32>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidVolume(format!("zero-length axis in {dims:?}")));
        }
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(Error::InvalidVolume(format!(
                "dims {dims:?} need {n} voxels, got {}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidVolume(format!("non-finite voxel value {bad}")));
        }
        let intensity_range = observed_range(&data);
        Ok(Volume { dims, spacing, data, intensity_range })
    }

    pub fn zeros(dims: [usize; 3], spacing: [f32; 3]) -> Result<Self> {
        Self::new(dims, spacing, vec![0.0; dims.iter().product()])
    }

    pub fn from_fn(
        dims: [usize; 3],
        spacing: [f32; 3],
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.iter().product());
        for d in 0..dims[2] {
            for h in 0..dims[1] {
                for w in 0..dims[0] {
                    data.push(f(w, h, d));
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f32; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn intensity_range(&self) -> (f32, f32) {
        self.intensity_range
    }

    #[inline]
    pub fn index(&self, w: usize, h: usize, d: usize) -> usize {
        (d * self.dims[1] + h) * self.dims[0] + w
    }

    #[inline]
    pub fn get(&self, w: usize, h: usize, d: usize) -> f32 {
        self.data[self.index(w, h, d)]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Volume {
        let data: Vec<f32> = self.data.iter().map(|&v| f(v)).collect();
        let intensity_range = observed_range(&data);
        Volume { dims: self.dims, spacing: self.spacing, data, intensity_range }
    }

    /// Min-max rescale onto `[0, 1]`.
    pub fn normalize(&self) -> Result<(Volume, IntensityWindow)> {
        let (min, max) = self.intensity_range;
        if max <= min {
            return Err(Error::DegenerateRange { min: min as f64, max: max as f64 });
        }
        let span = max - min;
        let out = self.map(|v| ((v - min) / span).clamp(0.0, 1.0));
        Ok((out, IntensityWindow { min, max }))
    }
}

/// Convenience wrapper for [`Volume::normalize`].
pub fn normalize(v: &Volume) -> Result<(Volume, IntensityWindow)> {
    v.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_affine_map() {
        let v = Volume::new([3, 1, 1], [1.0; 3], vec![2.0, 4.0, 6.0]).unwrap();
        let (n, win) = v.normalize().unwrap();
        assert_eq!(n.data(), &[0.0, 0.5, 1.0]);
        assert_eq!(win, IntensityWindow { min: 2.0, max: 6.0 });
        assert_eq!(win.denormalize(&n).data(), v.data());
    }

    #[test]
    fn normalize_unit_range_is_identity() {
        let v = Volume::new([4, 1, 1], [1.0; 3], vec![0.0, 0.25, 0.75, 1.0]).unwrap();
        assert_eq!(v.normalize().unwrap().0.data(), v.data());
    }

    #[test]
    fn normalize_constant_fails() {
        let v = Volume::new([2, 2, 1], [1.0; 3], vec![3.0; 4]).unwrap();
        assert!(matches!(v.normalize(), Err(Error::DegenerateRange { .. })));
    }

    #[test]
    fn construction_validates() {
        assert!(Volume::new([0, 2, 2], [1.0; 3], vec![]).is_err());
        assert!(Volume::new([2, 2, 2], [1.0; 3], vec![0.0; 7]).is_err());
        let v = Volume::from_fn([4, 3, 2], [1.0; 3], |w, h, d| (100 * d + 10 * h + w) as f32).unwrap();
        assert_eq!(v.get(3, 2, 1), 123.0);
        assert_eq!(v.intensity_range(), (0.0, 123.0));
    }
}
