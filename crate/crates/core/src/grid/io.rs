//! The ACSF binary container for sampled fields.
//!
//! Layout: magic `ACSF`, `u32` version (1), `u32 n`, `u32 N`, `u32 ncomp`,
//! `f64 L`, `u8 kind`, then `(re, im)` little-endian `f64` pairs,
//! component-major in grid order.

use super::{Field, Grid, LinearPart, MapField};
use crate::error::{AcsError, Result};
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 4] = b"ACSF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 4 + 8 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum AcsfKind {
    Field = 0,
    MapDisplacement = 1,
    Structure = 2,
    Beltrami = 3,
}

impl AcsfKind {
    pub fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            0 => Self::Field,
            1 => Self::MapDisplacement,
            2 => Self::Structure,
            3 => Self::Beltrami,
            other => return Err(AcsError::Format(format!("unknown kind byte {other}"))),
        })
    }
}

pub fn encode(field: &Field, kind: AcsfKind) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [g.n(), g.size(), field.ncomp()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&g.period().to_le_bytes());
    out.push(kind as u8);
    for z in field.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(AcsfKind, Field)> {
    if bytes.len() < HEADER_LEN {
        return Err(AcsError::Format("file shorter than the ACSF header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(AcsError::Format("bad magic, not an ACSF file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(AcsError::Format(format!(
            "unsupported ACSF version {version}"
        )));
    }
    let (n, size, ncomp) = (u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize);
    let period = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let kind = AcsfKind::from_byte(bytes[28])?;
    let grid = Grid::new(n, size, period)?;
    let expected = HEADER_LEN + 16 * grid.len() * ncomp;
    if ncomp == 0 || bytes.len() != expected {
        return Err(AcsError::Format(format!(
            "payload length {} does not match header (expected {expected})",
            bytes.len()
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            num_complex::Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((kind, Field::from_values(grid, ncomp, values)?))
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write(path: &Path, field: &Field, kind: AcsfKind) -> Result<()> {
    write_atomic(path, &encode(field, kind))
}

pub fn read(path: &Path) -> Result<(AcsfKind, Field)> {
    decode(&std::fs::read(path)?)
}

/// Path of the JSON sidecar holding the linear part of a map file.
pub fn linear_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".linear.json");
    PathBuf::from(s)
}

/// Writes a map as its displacement (kind 1) plus the linear-part sidecar.
pub fn write_map(path: &Path, map: &MapField) -> Result<()> {
    write(path, map.displacement(), AcsfKind::MapDisplacement)?;
    let json = serde_json::to_vec_pretty(map.linear())?;
    write_atomic(&linear_sidecar(path), &json)
}

/// Reads a map file; a missing sidecar means an identity linear part.
pub fn read_map(path: &Path) -> Result<MapField> {
    let (kind, disp) = read(path)?;
    if kind != AcsfKind::MapDisplacement {
        return Err(AcsError::Format(format!(
            "{} holds kind {kind:?}, expected a map displacement",
            path.display()
        )));
    }
    let side = linear_sidecar(path);
    let linear = if side.exists() {
        serde_json::from_slice::<LinearPart>(&std::fs::read(side)?)?
    } else {
        LinearPart::identity(disp.grid().n())
    };
    MapField::new(linear, disp)
}
