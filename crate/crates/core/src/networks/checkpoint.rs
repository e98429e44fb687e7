//! TSRC tensor checkpoints.
//!
//! Layout (little-endian): `"TSRC"`, u32 version, u32 tensor count, then per
//! tensor: u16 name length, UTF-8 name, u8 rank, u32 dims[rank], float32 data.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TSRC";
pub const VERSION: u32 = 1;

/// Ordered named tensors as stored in a checkpoint file.
pub type TensorMap = BTreeMap<String, Tensor<f32>>;

pub fn encode(tensors: &TensorMap) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, t) in tensors {
        let len = u16::try_from(name.len())
            .map_err(|_| Error::Checkpoint(format!("name too long: {name}")))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(t.shape().len() as u8);
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::TruncatedFile { expected: end, found: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<TensorMap> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4).map_err(|_| Error::Format("missing TSRC magic".into()))? != MAGIC {
        return Err(Error::Format("missing TSRC magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported TSRC version {version}")));
    }
    let count = r.u32()?;
    let mut out = TensorMap::new();
    for _ in 0..count {
        let len = u16::from_le_bytes(r.take(2)?.try_into().unwrap()) as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = r.take(1)?[0] as usize;
        let dims = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let n: usize = dims.iter().product();
        let data = r
            .take(4 * n)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let t = Tensor::new(&dims, data).map_err(|e| Error::Checkpoint(format!("{name}: {e}")))?;
        if out.insert(name.clone(), t).is_some() {
            return Err(Error::Checkpoint(format!("duplicate tensor `{name}`")));
        }
    }
    Ok(out)
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save(path: &Path, tensors: &TensorMap) -> Result<()> {
    write_atomic(path, &encode(tensors)?)
}

pub fn load(path: &Path) -> Result<TensorMap> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_exact() {
        let mut m = TensorMap::new();
        m.insert("w".into(), Tensor::new(&[2, 1, 1, 1, 3], (0..6).map(|i| i as f32 * 0.1).collect()).unwrap());
        m.insert("s".into(), Tensor::scalar(f32::MIN_POSITIVE));
        let bytes = encode(&m).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode(&back).unwrap(), bytes);
        assert_eq!(&bytes[..4], b"TSRC");
    }

    #[test]
    fn corrupt_inputs() {
        assert!(decode(b"XXXX\x01\0\0\0\0\0\0\0").is_err());
        let mut m = TensorMap::new();
        m.insert("a".into(), Tensor::new(&[4], vec![1.0; 4]).unwrap());
        let b = encode(&m).unwrap();
        assert!(matches!(decode(&b[..b.len() - 2]), Err(Error::TruncatedFile { .. })));
    }
}
