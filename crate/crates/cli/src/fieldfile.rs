//! Binary field files.
//!
//! Layout, all little-endian: magic `THINFB1\0`; `u32` version, `n`, `m`, then
//! points per axis for the `n + 1` axes; `f64` `h` and `extent`; `m` blocks of
//! `f64` nodal values in row-major order (last axis fastest); one byte (0/1)
//! per plate node for the mask.

use std::io::{Read, Write};
use std::path::Path;

use thinfb::{Grid, PlateMask, VectorField};

use crate::CliError;

pub const MAGIC: &[u8; 8] = b"THINFB1\0";
pub const VERSION: u32 = 1;

pub fn encode(field: &VectorField, mask: &PlateMask) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(64 + 8 * grid.m() * grid.node_count() + grid.plate_count());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, grid.n() as u32, grid.m() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &s in &grid.shape()[..=grid.n()] {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.h().to_le_bytes());
    out.extend_from_slice(&grid.extent().to_le_bytes());
    for comp in field.components() {
        for v in comp {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.extend(mask.bits().iter().map(|&b| b as u8));
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], CliError> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CliError::Corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CliError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CliError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<(VectorField, PlateMask), CliError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err(CliError::Corrupt("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(CliError::Corrupt(format!("unsupported version {version}")));
    }
    let (n, m) = (c.u32()? as usize, c.u32()? as usize);
    if n == 0 || n > 2 {
        return Err(CliError::Corrupt(format!("plate dimension {n} out of range")));
    }
    let shape = (0..=n).map(|_| c.u32().map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
    let (h, extent) = (c.f64()?, c.f64()?);
    let grid = Grid::new(n, m, h, extent).map_err(|e| CliError::Corrupt(e.to_string()))?;
    if grid.shape()[..=n] != shape[..] {
        return Err(CliError::Corrupt(format!("points per axis {shape:?} do not match h = {h}, extent = {extent}")));
    }
    let expected = 8 * m * grid.node_count() + grid.plate_count();
    if bytes.len() - c.pos != expected {
        return Err(CliError::Corrupt(format!("payload is {} bytes, header implies {expected}", bytes.len() - c.pos)));
    }
    let comps = (0..m)
        .map(|_| (0..grid.node_count()).map(|_| c.f64()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let bits = c
        .take(grid.plate_count())?
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(CliError::Corrupt(format!("mask byte {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let field = VectorField::from_components(&grid, comps).map_err(|e| CliError::Corrupt(e.to_string()))?;
    Ok((field, PlateMask::from_bits(bits)))
}

pub fn write(path: &Path, field: &VectorField, mask: &PlateMask) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(&encode(field, mask)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<(VectorField, PlateMask), CliError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| CliError::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use thinfb::profiles::{sample_with_mask, ProfileSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = thinfb::make_grid(2, 3, 0.125, 1.0).unwrap();
        let spec = ProfileSpec::halfplane(2, 3, 0.7).with_shift(0.1).with_xi(vec![0.0, 0.6, 0.8]);
        let (g, mask) = sample_with_mask(&grid, &[spec]).unwrap();
        let bytes = encode(&g, &mask);
        let (g2, m2) = decode(&bytes).unwrap();
        assert_eq!(m2, mask);
        for (a, b) in g.components().iter().zip(g2.components()) {
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(encode(&g2, &m2), bytes);
    }

    #[test]
    fn header_layout() {
        let grid = thinfb::make_grid(1, 2, 0.25, 1.0).unwrap();
        let bytes = encode(&VectorField::zeros(&grid), &PlateMask::empty(&grid));
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 9);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 5);
        assert_eq!(f64::from_le_bytes(bytes[28..36].try_into().unwrap()), 0.25);
        assert_eq!(bytes.len(), 44 + 8 * 2 * 45 + 9);
    }

    #[test]
    fn corrupt_inputs() {
        let grid = thinfb::make_grid(1, 1, 0.25, 1.0).unwrap();
        let bytes = encode(&VectorField::zeros(&grid), &PlateMask::full(&grid));
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(CliError::Corrupt(_))));
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode(&long).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(decode(&magic).is_err());
        let mut mask = bytes.clone();
        *mask.last_mut().unwrap() = 7;
        assert!(decode(&mask).is_err());
        assert!(decode(&bytes[..10]).is_err());
    }
}
