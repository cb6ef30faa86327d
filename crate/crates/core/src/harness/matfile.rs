//! Binary dense matrix files: the 8-byte magic `RBMSMAT1`, little-endian
//! `u64` rows and cols, then the entries as little-endian `f64` in
//! column-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const MAGIC: &[u8; 8] = b"RBMSMAT1";
const HEADER: u64 = 24;

/// Writes to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn encode_matrix(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER as usize + 8 * m.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    if (bytes.len() as u64) < HEADER {
        return Err(Error::Truncated {
            expected: HEADER,
            found: bytes.len() as u64,
        });
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("eight bytes"));
    let (rows, cols) = (word(8), word(16));
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER))
        .filter(|&b| usize::try_from(b).is_ok())
        .ok_or(Error::SizeOverflow { rows, cols })?;
    if bytes.len() as u64 != expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len() as u64,
        });
    }
    let data = bytes[HEADER as usize..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
        .collect();
    DenseMatrix::new(rows as usize, cols as usize, data)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_atomic(path, &encode_matrix(m))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    decode_matrix(&fs::read(path)?)
}
