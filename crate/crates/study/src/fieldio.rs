//! Binary field dumps.
//!
//! Layout (all little endian):
//!
//! | bytes | content                    |
//! |-------|----------------------------|
//! | 8     | magic `FRBFIELD`           |
//! | 8     | `nx` as u64                |
//! | 8     | `ny` as u64                |
//! | 8     | `lx` as f64                |
//! | 8     | `ly` as f64                |
//! | 8·H   | cell values, row-major, x₁ fastest |

use std::fs;
use std::path::Path;

use frozenrb_core::{Field, GridSpec};

use crate::error::{IoContext, Result, StudyError};

pub const MAGIC: &[u8; 8] = b"FRBFIELD";
const HEADER_LEN: usize = 40;

pub fn encode(field: &Field) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.nx() as u64).to_le_bytes());
    out.extend_from_slice(&(g.ny() as u64).to_le_bytes());
    out.extend_from_slice(&g.lx().to_le_bytes());
    out.extend_from_slice(&g.ly().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn word(bytes: &[u8], at: usize) -> [u8; 8] {
    bytes[at..at + 8].try_into().expect("slice of length 8")
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Field> {
    let bad = |reason: String| StudyError::Format { path: path.to_path_buf(), reason };
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(bad("missing field header".into()));
    }
    let nx = u64::from_le_bytes(word(bytes, 8)) as usize;
    let ny = u64::from_le_bytes(word(bytes, 16)) as usize;
    let lx = f64::from_le_bytes(word(bytes, 24));
    let ly = f64::from_le_bytes(word(bytes, 32));
    let grid = GridSpec::new(nx, ny, lx, ly).map_err(|e| bad(e.to_string()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 8 * grid.len() {
        return Err(bad(format!("expected {} values, found {} bytes", grid.len(), payload.len())));
    }
    let values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Field::from_values(grid, values).map_err(|e| bad(e.to_string()))
}

pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    fs::write(path, encode(field)).at(path)
}

pub fn read_field(path: &Path) -> Result<Field> {
    let bytes = fs::read(path).at(path)?;
    decode(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = GridSpec::new(3, 2, 2.0, 1.0).unwrap();
        let f = Field::from_values(g, vec![0.5, -1.0, 2.0, 3.0, 4.0, 1e-300]).unwrap();
        let bytes = encode(&f);
        assert_eq!(bytes.len(), 40 + 48);
        assert_eq!(&bytes[..8], b"FRBFIELD");
        assert_eq!(bytes[8], 3);
        assert_eq!(bytes[16], 2);
        assert_eq!(decode(&bytes, Path::new("mem")).unwrap(), f);
    }

    #[test]
    fn rejects_truncated_payload() {
        let g = GridSpec::new(2, 2, 1.0, 1.0).unwrap();
        let bytes = encode(&Field::zeros(g));
        assert!(decode(&bytes[..bytes.len() - 1], Path::new("mem")).is_err());
        assert!(decode(b"FRBFIELX", Path::new("mem")).is_err());
    }
}
