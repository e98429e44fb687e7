//! Volume containers, file formats, resampling and patch tiling.

pub mod nifti;
mod patch;
mod resample;
pub mod rvol;
pub mod synthetic;
mod volume;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use nifti::NiftiHeader;
pub use patch::{axis_origins, extract_patches, stitch_patches, PatchGrid};
pub use resample::{downsample_half, upsample_trilinear, upsample_trilinear_raw};
pub use volume::{normalize, IntensityWindow, Volume};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeFormat {
    Nifti,
    Rvol,
}

impl VolumeFormat {
    /// Guesses the format from the file extension (`.nii` or `.rvol`).
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("nii") | Some("hdr") => Ok(VolumeFormat::Nifti),
            Some("rvol") => Ok(VolumeFormat::Rvol),
            _ => Err(Error::Format(format!("cannot infer volume format of {}", path.display()))),
        }
    }
}

pub fn read_volume(path: &Path, format: VolumeFormat) -> Result<Volume> {
    let bytes = fs::read(path)?;
    match format {
        VolumeFormat::Rvol => rvol::decode(&bytes),
        VolumeFormat::Nifti => {
            let hdr = NiftiHeader::parse(&bytes)?;
            if hdr.is_single_file() {
                nifti::decode(&bytes)
            } else {
                let img = fs::read(path.with_extension("img"))?;
                let off = hdr.vox_offset.max(0.0) as usize;
                if img.len() < off {
                    return Err(Error::TruncatedFile { expected: off, found: img.len() });
                }
                nifti::decode_voxels(&hdr, &img[off..])
            }
        }
    }
}

pub fn write_volume(v: &Volume, path: &Path, format: VolumeFormat) -> Result<()> {
    let bytes = match format {
        VolumeFormat::Rvol => rvol::encode(v),
        VolumeFormat::Nifti => nifti::encode(v)?,
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a volume, inferring the format from the extension.
pub fn load(path: &Path) -> Result<Volume> {
    read_volume(path, VolumeFormat::from_path(path)?)
}

pub fn save(v: &Volume, path: &Path) -> Result<()> {
    write_volume(v, path, VolumeFormat::from_path(path)?)
}
