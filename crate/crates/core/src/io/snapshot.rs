//! `CRF1` snapshots: a 36-byte little-endian header followed by `nᵈ`
//! interleaved `(re, im)` f64 pairs, row-major with the last axis fastest.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Side};

pub const MAGIC: [u8; 4] = *b"CRF1";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 36;

fn side_code(side: Side) -> u32 {
    match side {
        Side::Frequency => 0,
        Side::Physical => 1,
    }
}

pub fn encode_snapshot(f: &Field, t: f64) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.values().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&side_code(f.side()).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4-byte slice"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8-byte slice"))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(Field, f64)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "truncated header: {} of {HEADER_LEN} bytes",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
    }
    let version = u32_at(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let d = u32_at(bytes, 8) as usize;
    let n = u32_at(bytes, 12) as usize;
    let side = match u32_at(bytes, 16) {
        0 => Side::Frequency,
        1 => Side::Physical,
        s => return Err(Error::Format(format!("unknown side code {s}"))),
    };
    let half_width = f64_at(bytes, 20);
    let t = f64_at(bytes, 28);
    if !(2..=3).contains(&d) {
        return Err(Error::Format(format!("dimension {d} out of range")));
    }
    let payload = n
        .checked_pow(d as u32)
        .and_then(|c| c.checked_mul(16))
        .ok_or_else(|| Error::Format(format!("size overflow for n = {n}, d = {d}")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != payload {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {payload}",
            body.len()
        )));
    }
    let grid = GridSpec::new(d, n, half_width).map_err(|e| Error::Format(e.to_string()))?;
    let values = body
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    Ok((Field::from_values(grid, side, values)?, t))
}

pub fn write_snapshot(f: &Field, t: f64, path: &Path) -> Result<()> {
    fs::write(path, encode_snapshot(f, t))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    decode_snapshot(&fs::read(path)?)
}
