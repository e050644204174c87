//! Binary SLC stack files.
//!
//! Layout, all little-endian: magic `TSAR`, format version `u16`, channels
//! `u16`, azimuth lines `u32`, range bins `u32`, flags `u32` (reserved, zero),
//! then `N * A * R` samples of two `f64` (real, imaginary), channel-major,
//! then azimuth, then range.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tomosar::{ArrayGeometry, SlcStack};

pub const SLC_MAGIC: [u8; 4] = *b"TSAR";
pub const SLC_VERSION: u16 = 1;
pub const SLC_HEADER_LEN: usize = 20;

pub fn write_slc_stack(stack: &SlcStack, path: &Path) -> Result<()> {
    let channels = u16::try_from(stack.channels())
        .map_err(|_| Error::Format(format!("{} channels do not fit the header", stack.channels())))?;
    let azimuth = u32::try_from(stack.azimuth())
        .map_err(|_| Error::Format("azimuth size does not fit the header".into()))?;
    let range = u32::try_from(stack.range())
        .map_err(|_| Error::Format("range size does not fit the header".into()))?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&SLC_MAGIC)?;
    out.write_all(&SLC_VERSION.to_le_bytes())?;
    out.write_all(&channels.to_le_bytes())?;
    out.write_all(&azimuth.to_le_bytes())?;
    out.write_all(&range.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    for z in stack.data() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a stack. The file fixes the channel count; the remaining geometry
/// is taken from `geometry`.
pub fn read_slc_stack(path: &Path, geometry: &ArrayGeometry) -> Result<SlcStack> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < SLC_HEADER_LEN {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: SLC_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
    if magic != SLC_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: magic,
        });
    }
    let u16_at = |i: usize| u16::from_le_bytes(bytes[i..i + 2].try_into().expect("2 bytes"));
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = u16_at(4);
    if version != SLC_VERSION {
        return Err(Error::VersionMismatch {
            path: path.to_path_buf(),
            found: version,
            expected: SLC_VERSION,
        });
    }
    let (channels, azimuth, range, flags) = (u16_at(6) as usize, u32_at(8) as usize, u32_at(12) as usize, u32_at(16));
    if flags != 0 {
        return Err(Error::Format(format!("unsupported flags {flags:#x} in {}", path.display())));
    }
    let expected = SLC_HEADER_LEN as u64 + 16 * channels as u64 * azimuth as u64 * range as u64;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::Format(format!(
            "{} has {} trailing bytes after the payload",
            path.display(),
            found - expected
        )));
    }
    let data = bytes[SLC_HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_le(&c[..8]), f64_le(&c[8..])))
        .collect();
    SlcStack::from_data(geometry.with_elements(channels), azimuth, range, data)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn f64_le(b: &[u8]) -> f64 {
    f64::from_le_bytes(b.try_into().expect("8 bytes"))
}
