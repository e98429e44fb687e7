//! Minimal NIfTI-1 reader/writer: uncompressed, little-endian, 3-D (or 4-D
//! with a single frame), int16 / float32 / float64 voxels.

use crate::error::{Error, Result};

use super::Volume;

pub const HEADER_SIZE: usize = 348;
/// Header plus the 4-byte extension flag.
pub const SINGLE_FILE_OFFSET: usize = 352;

pub const DT_INT16: i16 = 4;
pub const DT_FLOAT32: i16 = 16;
pub const DT_FLOAT64: i16 = 64;

const OFF_DIM: usize = 40;
const OFF_DATATYPE: usize = 70;
const OFF_BITPIX: usize = 72;
const OFF_PIXDIM: usize = 76;
const OFF_VOX_OFFSET: usize = 108;
const OFF_SCL_SLOPE: usize = 112;
const OFF_SCL_INTER: usize = 116;
const OFF_XYZT_UNITS: usize = 123;
const OFF_MAGIC: usize = 344;

#[derive(Clone, Debug, PartialEq)]
pub struct NiftiHeader {
    pub dim: [i16; 8],
    pub datatype: i16,
    pub bitpix: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub magic: [u8; 4],
}

fn i16_at(b: &[u8], off: usize) -> i16 {
    i16::from_le_bytes([b[off], b[off + 1]])
}

fn f32_at(b: &[u8], off: usize) -> f32 {
    f32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

fn bits_for(datatype: i16) -> Result<i16> {
    match datatype {
        DT_INT16 => Ok(16),
        DT_FLOAT32 => Ok(32),
        DT_FLOAT64 => Ok(64),
        other => Err(Error::UnsupportedDtype(other)),
    }
}

impl NiftiHeader {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_SIZE {
            return Err(Error::TruncatedFile { expected: HEADER_SIZE, found: bytes.len() });
        }
        let sizeof_hdr = i32::from_le_bytes(bytes[0..4].try_into().unwrap());
        if sizeof_hdr != HEADER_SIZE as i32 {
            return Err(Error::Format(format!(
                "sizeof_hdr is {sizeof_hdr}, expected 348 (little-endian NIfTI-1)"
            )));
        }
        let magic: [u8; 4] = bytes[OFF_MAGIC..OFF_MAGIC + 4].try_into().unwrap();
        if &magic != b"n+1\0" && &magic != b"ni1\0" {
            return Err(Error::Format(format!("bad NIfTI magic {magic:?}")));
        }
        let mut dim = [0i16; 8];
        let mut pixdim = [0f32; 8];
        for i in 0..8 {
            dim[i] = i16_at(bytes, OFF_DIM + 2 * i);
            pixdim[i] = f32_at(bytes, OFF_PIXDIM + 4 * i);
        }
        let hdr = NiftiHeader {
            dim,
            datatype: i16_at(bytes, OFF_DATATYPE),
            bitpix: i16_at(bytes, OFF_BITPIX),
            pixdim,
            vox_offset: f32_at(bytes, OFF_VOX_OFFSET),
            scl_slope: f32_at(bytes, OFF_SCL_SLOPE),
            scl_inter: f32_at(bytes, OFF_SCL_INTER),
            magic,
        };
        hdr.validate()?;
        Ok(hdr)
    }

    fn validate(&self) -> Result<()> {
        if !(3..=4).contains(&self.dim[0]) {
            return Err(Error::Format(format!("dim[0] = {} (need 3 or 4)", self.dim[0])));
        }
        if self.dim[1..4].iter().any(|&d| d < 1) {
            return Err(Error::Format(format!("non-positive spatial dims {:?}", &self.dim[1..4])));
        }
        if self.dim[0] == 4 && self.dim[4] > 1 {
            return Err(Error::Format("4-D time series are not supported".into()));
        }
        let bits = bits_for(self.datatype)?;
        if self.bitpix != bits {
            return Err(Error::Format(format!(
                "bitpix {} inconsistent with datatype {}",
                self.bitpix, self.datatype
            )));
        }
        Ok(())
    }

    pub fn is_single_file(&self) -> bool {
        &self.magic == b"n+1\0"
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.dim[1], self.dim[2], self.dim[3]].map(|d| d as usize)
    }

    pub fn spacing(&self) -> [f32; 3] {
        [self.pixdim[1], self.pixdim[2], self.pixdim[3]].map(|s| if s > 0.0 { s } else { 1.0 })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut b = vec![0u8; HEADER_SIZE];
        b[0..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
        b[38] = b'r'; // regular
        for i in 0..8 {
            b[OFF_DIM + 2 * i..OFF_DIM + 2 * i + 2].copy_from_slice(&self.dim[i].to_le_bytes());
            b[OFF_PIXDIM + 4 * i..OFF_PIXDIM + 4 * i + 4].copy_from_slice(&self.pixdim[i].to_le_bytes());
        }
        b[OFF_DATATYPE..OFF_DATATYPE + 2].copy_from_slice(&self.datatype.to_le_bytes());
        b[OFF_BITPIX..OFF_BITPIX + 2].copy_from_slice(&self.bitpix.to_le_bytes());
        b[OFF_VOX_OFFSET..OFF_VOX_OFFSET + 4].copy_from_slice(&self.vox_offset.to_le_bytes());
        b[OFF_SCL_SLOPE..OFF_SCL_SLOPE + 4].copy_from_slice(&self.scl_slope.to_le_bytes());
        b[OFF_SCL_INTER..OFF_SCL_INTER + 4].copy_from_slice(&self.scl_inter.to_le_bytes());
        b[OFF_XYZT_UNITS] = 2; // millimeters
        b[OFF_MAGIC..OFF_MAGIC + 4].copy_from_slice(&self.magic);
        b
    }
}

/// Decodes voxels from `payload` (which starts at the first voxel).
pub fn decode_voxels(hdr: &NiftiHeader, payload: &[u8]) -> Result<Volume> {
    let dims = hdr.dims();
    let n: usize = dims.iter().product();
    let width = (bits_for(hdr.datatype)? / 8) as usize;
    if payload.len() < n * width {
        return Err(Error::TruncatedFile { expected: n * width, found: payload.len() });
    }
    let raw = &payload[..n * width];
    let mut data: Vec<f32> = match hdr.datatype {
        DT_INT16 => raw.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]]) as f32).collect(),
        DT_FLOAT32 => raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
        DT_FLOAT64 => raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()) as f32)
            .collect(),
        other => return Err(Error::UnsupportedDtype(other)),
    };
    if hdr.scl_slope != 0.0 && hdr.scl_slope.is_finite() {
        let (s, i) = (hdr.scl_slope, hdr.scl_inter);
        data.iter_mut().for_each(|v| *v = *v * s + i);
    }
    Volume::new(dims, hdr.spacing(), data)
}

/// Parses a single-file (`n+1`) image held in memory.
pub fn decode(bytes: &[u8]) -> Result<Volume> {
    let hdr = NiftiHeader::parse(bytes)?;
    if !hdr.is_single_file() {
        return Err(Error::Format("`ni1` header: voxel data lives in a separate .img file".into()));
    }
    let offset = (hdr.vox_offset.max(SINGLE_FILE_OFFSET as f32)) as usize;
    if bytes.len() < offset {
        return Err(Error::TruncatedFile { expected: offset, found: bytes.len() });
    }
    decode_voxels(&hdr, &bytes[offset..])
}

/// Encodes as single-file float32 with unit slope.
pub fn encode(v: &Volume) -> Result<Vec<u8>> {
    let mut dim = [1i16; 8];
    dim[0] = 3;
    for (i, &d) in v.dims().iter().enumerate() {
        dim[i + 1] = i16::try_from(d)
            .map_err(|_| Error::Format(format!("axis length {d} exceeds NIfTI-1 limits")))?;
    }
    let mut pixdim = [1f32; 8];
    pixdim[0] = 1.0; // qfac
    pixdim[1..4].copy_from_slice(&v.spacing());
    let hdr = NiftiHeader {
        dim,
        datatype: DT_FLOAT32,
        bitpix: 32,
        pixdim,
        vox_offset: SINGLE_FILE_OFFSET as f32,
        scl_slope: 1.0,
        scl_inter: 0.0,
        magic: *b"n+1\0",
    };
    let mut out = hdr.encode();
    out.extend_from_slice(&[0u8; 4]);
    for x in v.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}
