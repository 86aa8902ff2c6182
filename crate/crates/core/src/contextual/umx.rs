//! UMX1 usage-matrix files.
//!
//! Layout, all little-endian: `b"UMX1"`, `u32` row count N, `u32` dimension D,
//! then N·D `f32` values in row-major order.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::UsageMatrix;
use crate::Period;

pub const MAGIC: &[u8; 4] = b"UMX1";
const HEADER_LEN: usize = 12;

#[derive(Debug, Error)]
pub enum UmxError {
    #[error("magic: expected \"UMX1\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("header: file is {0} bytes, shorter than the 12-byte header")]
    ShortHeader(usize),
    #[error("dimension: D must be positive")]
    ZeroDimension,
    #[error("payload: N={rows} x D={dim} needs {expected} bytes, found {found} (truncated)")]
    Truncated {
        rows: u32,
        dim: u32,
        expected: usize,
        found: usize,
    },
    #[error("payload: {extra} bytes beyond N={rows} x D={dim} values (row count or dimension mismatch)")]
    TrailingBytes { rows: u32, dim: u32, extra: usize },
    #[error("header: N x D overflows")]
    TooLarge,
    #[error("matrix has {0} rows or dimension {1}, exceeding the u32 header fields")]
    Unrepresentable(usize, usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses a UMX1 stream. The returned matrix has an empty lemma and period
/// `T1`; relabel it with [`UsageMatrix::labelled`].
pub fn read_usage_matrix<R: Read>(mut reader: R) -> Result<UsageMatrix, UmxError> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        let n = reader.read(&mut header[got..])?;
        if n == 0 {
            if got >= 4 && &header[..4] != MAGIC {
                return Err(UmxError::BadMagic(header[..4].try_into().unwrap()));
            }
            return Err(UmxError::ShortHeader(got));
        }
        got += n;
    }
    let magic: [u8; 4] = header[..4].try_into().unwrap();
    if &magic != MAGIC {
        return Err(UmxError::BadMagic(magic));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if dim == 0 {
        return Err(UmxError::ZeroDimension);
    }
    let expected = (rows as usize)
        .checked_mul(dim as usize)
        .and_then(|v| v.checked_mul(4))
        .ok_or(UmxError::TooLarge)?;
    let mut payload = Vec::with_capacity(expected.min(1 << 28));
    reader.read_to_end(&mut payload)?;
    if payload.len() < expected {
        return Err(UmxError::Truncated {
            rows,
            dim,
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(UmxError::TrailingBytes {
            rows,
            dim,
            extra: payload.len() - expected,
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    Ok(UsageMatrix::from_flat(String::new(), Period::T1, rows as usize, dim as usize, data))
}

/// Writes a matrix as UMX1. Values are narrowed to `f32`.
pub fn write_usage_matrix<W: Write>(mut writer: W, m: &UsageMatrix) -> Result<(), UmxError> {
    let rows = u32::try_from(m.rows()).map_err(|_| UmxError::Unrepresentable(m.rows(), m.dim()))?;
    let dim = u32::try_from(m.dim()).map_err(|_| UmxError::Unrepresentable(m.rows(), m.dim()))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + m.as_flat().len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&dim.to_le_bytes());
    for &v in m.as_flat() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    writer.write_all(&buf)?;
    Ok(())
}
