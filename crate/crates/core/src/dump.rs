//! Flat binary dumps of space-time fields.
//!
//! Layout, all little-endian:
//!
//! | offset | type  | content   |
//! |--------|-------|-----------|
//! | 0      | u32   | dimension |
//! | 4      | u32   | n_max     |
//! | 8      | f64   | tau_min   |
//! | 16     | f64   | tau_max   |
//! | 24     | f64   | tau_step  |
//! | 32     | f32×2 | samples   |
//!
//! Samples are `(re, im)` pairs for every box mode in row-major order (first coordinate
//! outermost), and within each mode for every tau sample in increasing order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{FrequencyGrid, SpaceTimeField};

pub const HEADER_LEN: usize = 32;
/// Dumps larger than this are refused in both directions.
pub const MAX_DUMP_BYTES: u64 = 1 << 30;

fn payload_len(grid: &FrequencyGrid) -> Option<u64> {
    (grid.box_size() as u64)
        .checked_mul(grid.samples() as u64)?
        .checked_mul(8)
}

pub fn encode_field(u: &SpaceTimeField) -> Result<Vec<u8>> {
    let g = u.grid();
    let payload = payload_len(g)
        .filter(|&n| n + HEADER_LEN as u64 <= MAX_DUMP_BYTES)
        .ok_or_else(|| Error::Dump(format!("field too large to dump (limit {MAX_DUMP_BYTES} bytes)")))?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload as usize);
    out.extend_from_slice(&(g.dimension() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n_max() as u32).to_le_bytes());
    out.extend_from_slice(&g.tau_min().to_le_bytes());
    out.extend_from_slice(&g.tau_max().to_le_bytes());
    out.extend_from_slice(&g.tau_step().to_le_bytes());
    for n in g.modes() {
        for j in 0..g.samples() {
            let z = u.get(n, j);
            out.extend_from_slice(&(z.re as f32).to_le_bytes());
            out.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
    }
    Ok(out)
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}
fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}
fn f32_at(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

/// Parse the header alone.
pub fn decode_header(bytes: &[u8]) -> Result<FrequencyGrid> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Dump(format!(
            "need a {HEADER_LEN}-byte header, got {} bytes",
            bytes.len()
        )));
    }
    let d = u32_at(bytes, 0);
    let n_max = u32_at(bytes, 4);
    if n_max > i32::MAX as u32 {
        return Err(Error::Dump(format!("n_max {n_max} out of range")));
    }
    FrequencyGrid::with_window(
        d as usize,
        n_max as i32,
        f64_at(bytes, 8),
        f64_at(bytes, 16),
        f64_at(bytes, 24),
    )
    .map_err(|e| Error::Dump(format!("bad header: {e}")))
}

/// Decode a dump. Each column is restored to its run from the first to the last nonzero
/// sample, and columns that are entirely zero are left out.
pub fn decode_field(bytes: &[u8]) -> Result<SpaceTimeField> {
    let grid = decode_header(bytes)?;
    let payload = payload_len(&grid)
        .filter(|&n| n + HEADER_LEN as u64 <= MAX_DUMP_BYTES)
        .ok_or_else(|| Error::Dump("declared field exceeds the size limit".into()))?;
    let have = (bytes.len() - HEADER_LEN) as u64;
    if have != payload {
        return Err(Error::Dump(format!("payload is {have} bytes, header implies {payload}")));
    }
    let m = grid.samples();
    let mut u = SpaceTimeField::zeros(grid);
    for (k, n) in grid.modes().enumerate() {
        let base = HEADER_LEN + k * m * 8;
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            let re = f32_at(bytes, base + 8 * j);
            let im = f32_at(bytes, base + 8 * j + 4);
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Dump(format!("non-finite sample at mode {:?}, index {j}", n.0)));
            }
            values.push(Complex64::new(re as f64, im as f64));
        }
        let Some(first) = values.iter().position(|z| *z != Complex64::ZERO) else {
            continue;
        };
        let last = values.iter().rposition(|z| *z != Complex64::ZERO).unwrap_or(first);
        values.truncate(last + 1);
        values.drain(..first);
        u.insert(n, first, values)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Mode;

    #[test]
    fn round_trip() {
        let g = FrequencyGrid::new(2, 2, 0.5).unwrap();
        let mut u = SpaceTimeField::zeros(g);
        u.insert_fn(Mode::new(1, -2), -3.0, 2.0, |t| Complex64::new(t, -0.5 * t)).unwrap();
        let bytes = encode_field(&u).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 25 * g.samples() * 8);
        let back = decode_field(&bytes).unwrap();
        assert_eq!(back.support(), vec![Mode::new(1, -2)]);
        assert_eq!(back, u);
        assert_eq!(encode_field(&back).unwrap(), bytes);
    }

    #[test]
    fn rejects_malformed() {
        let g = FrequencyGrid::new(1, 1, 0.5).unwrap();
        let bytes = encode_field(&SpaceTimeField::zeros(g)).unwrap();
        assert!(decode_field(&bytes[..10]).is_err());
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[HEADER_LEN..HEADER_LEN + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(decode_field(&bad).is_err());
        let mut huge = bytes.clone();
        huge[4..8].copy_from_slice(&1_000_000u32.to_le_bytes());
        assert!(decode_field(&huge).is_err());
        assert!(decode_field(&bytes).unwrap().is_zero());
    }
}
