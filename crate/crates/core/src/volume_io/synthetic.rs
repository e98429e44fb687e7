//! Seeded synthetic phantoms: smooth band-limited texture plus sharp-edged
//! geometric primitives, normalized to [0, 1].

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Volume;
use crate::error::Result;

/// Shape mix of a phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomConfig {
    /// Number of random plane waves in the texture.
    pub waves: usize,
    /// Highest wave frequency, in cycles per voxel.
    pub max_frequency: f64,
    pub spheres: usize,
    pub boxes: usize,
    /// Texture amplitude relative to the primitives.
    pub texture_weight: f64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        PhantomConfig { waves: 24, max_frequency: 0.2, spheres: 6, boxes: 4, texture_weight: 0.35 }
    }
}

enum Primitive {
    Sphere { c: [f64; 3], r: f64, v: f64 },
    Cuboid { lo: [f64; 3], hi: [f64; 3], v: f64 },
}

/// Builds a `dims` phantom with unit spacing.
pub fn phantom(dims: [usize; 3], seed: u64, cfg: &PhantomConfig) -> Result<Volume> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<([f64; 3], f64, f64)> = (0..cfg.waves)
        .map(|_| {
            let dir = unit_vector(&mut rng);
            let f = rng.random_range(0.02..cfg.max_frequency.max(0.021));
            let k = dir.map(|c| c * f * TAU);
            (k, rng.random_range(0.0..TAU), rng.random_range(0.3..1.0))
        })
        .collect();
    let ext = dims.map(|l| l as f64);
    let mut prims = Vec::new();
    for _ in 0..cfg.spheres {
        let c = [0, 1, 2].map(|a| rng.random_range(0.0..ext[a]));
        let r = rng.random_range(0.08..0.25) * ext.iter().cloned().fold(f64::MAX, f64::min);
        prims.push(Primitive::Sphere { c, r, v: rng.random_range(-1.0..1.0) });
    }
    for _ in 0..cfg.boxes {
        let lo = [0, 1, 2].map(|a| rng.random_range(0.0..ext[a] * 0.7));
        let hi = [0, 1, 2].map(|a| lo[a] + rng.random_range(0.15..0.45) * ext[a]);
        prims.push(Primitive::Cuboid { lo, hi, v: rng.random_range(-1.0..1.0) });
    }
    let raw = Volume::from_fn(dims, [1.0; 3], |w, h, d| {
        let p = [w as f64 + 0.5, h as f64 + 0.5, d as f64 + 0.5];
        let texture: f64 = waves
            .iter()
            .map(|(k, phase, amp)| amp * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + phase).cos())
            .sum::<f64>()
            / (cfg.waves.max(1) as f64).sqrt();
        let shapes: f64 = prims
            .iter()
            .map(|pr| match pr {
                Primitive::Sphere { c, r, v } => {
                    let d2: f64 = (0..3).map(|a| (p[a] - c[a]).powi(2)).sum();
                    if d2 <= r * r {
                        *v
                    } else {
                        0.0
                    }
                }
                Primitive::Cuboid { lo, hi, v } => {
                    if (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]) {
                        *v
                    } else {
                        0.0
                    }
                }
            })
            .sum();
        (cfg.texture_weight * texture + shapes) as f32
    })?;
    Ok(raw.normalize()?.0)
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [0, 1, 2].map(|_| rng.random_range(-1.0..1.0f64));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.map(|c| c / n);
        }
    }
}
