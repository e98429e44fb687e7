//! RVOL: a minimal little-endian float32 volume container.
//!
//! Layout: `"RVOL"`, u32 version (1), u32 W, u32 H, u32 D, u32 dtype
//! (1 = float32), f32 sx, f32 sy, f32 sz, then `W·H·D` float32 voxels
//! x-fastest.

use crate::error::{Error, Result};

use super::Volume;

pub const MAGIC: &[u8; 4] = b"RVOL";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u32 = 1;
pub const HEADER_LEN: usize = 36;

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

fn f32_at(b: &[u8], off: usize) -> f32 {
    f32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<Volume> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing RVOL magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile { expected: HEADER_LEN, found: bytes.len() });
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported RVOL version {version}")));
    }
    let dims = [u32_at(bytes, 8), u32_at(bytes, 12), u32_at(bytes, 16)].map(|v| v as usize);
    let dtype = u32_at(bytes, 20);
    if dtype != DTYPE_F32 {
        return Err(Error::UnsupportedDtype(dtype as i16));
    }
    let spacing = [f32_at(bytes, 24), f32_at(bytes, 28), f32_at(bytes, 32)];
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format(format!("dims {dims:?} overflow")))?;
    let expected = HEADER_LEN + 4 * n;
    if bytes.len() < expected {
        return Err(Error::TruncatedFile { expected, found: bytes.len() });
    }
    let data = bytes[HEADER_LEN..expected]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Volume::new(dims, spacing, data)
}

pub fn encode(v: &Volume) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * v.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in v.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&DTYPE_F32.to_le_bytes());
    for s in v.spacing() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    for x in v.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(b"RVOL");
        for v in [1u32, 4, 4, 4, 1] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for s in [1.0f32, 1.0, 1.0] {
            b.extend_from_slice(&s.to_le_bytes());
        }
        for i in 0..64 {
            b.extend_from_slice(&(i as f32).to_le_bytes());
        }
        b
    }

    #[test]
    fn byte_fixture_decodes() {
        let v = decode(&fixture()).unwrap();
        assert_eq!(v.dims(), [4, 4, 4]);
        // (w=3, h=2, d=1) sits at (1·4 + 2)·4 + 3
        assert_eq!(v.get(3, 2, 1), ((1 * 4 + 2) * 4 + 3) as f32);
        assert_eq!(encode(&v), fixture());
    }

    #[test]
    fn bad_inputs() {
        let mut b = fixture();
        b[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode(&b), Err(Error::Format(_))));
        let b = fixture();
        assert!(matches!(decode(&b[..b.len() - 1]), Err(Error::TruncatedFile { .. })));
        let mut b = fixture();
        b[20] = 2;
        assert!(matches!(decode(&b), Err(Error::UnsupportedDtype(2))));
    }
}
