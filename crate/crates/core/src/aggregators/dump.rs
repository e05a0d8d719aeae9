use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::ClientId;

/// Decoded projection dump.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionDump {
    pub n: usize,
    pub h: usize,
    /// Row-major N×h coordinates.
    pub coords: Vec<f32>,
    pub client_ids: Vec<ClientId>,
    pub is_attacker: Vec<bool>,
}

/// Little-endian: `u32 N, u32 h`, `N*h` f32 coordinates, `N` u32 client
/// ids, `N` u8 attacker flags.
pub fn write_projection_dump(
    path: impl AsRef<Path>,
    projected: &Matrix,
    client_ids: &[ClientId],
    is_attacker: &[bool],
) -> Result<()> {
    let n = projected.rows();
    if client_ids.len() != n || is_attacker.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: client_ids.len().min(is_attacker.len()),
        });
    }
    let mut out = Vec::with_capacity(8 + n * projected.cols() * 4 + n * 5);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(projected.cols() as u32).to_le_bytes());
    for &x in projected.as_slice() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    for &id in client_ids {
        out.extend_from_slice(&id.to_le_bytes());
    }
    out.extend(is_attacker.iter().map(|&a| u8::from(a)));
    fs::write(path, out)?;
    Ok(())
}

pub fn read_projection_dump(path: impl AsRef<Path>) -> Result<ProjectionDump> {
    let bytes = fs::read(path)?;
    let word = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| Error::TruncatedFile("projection dump".into()))
    };
    let n = word(0)? as usize;
    let h = word(4)? as usize;
    let expected = 8 + n * h * 4 + n * 4 + n;
    if bytes.len() != expected {
        return Err(Error::TruncatedFile(format!(
            "projection dump is {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let coords = (0..n * h)
        .map(|k| f32::from_bits(word(8 + 4 * k).expect("length checked")))
        .collect();
    let ids_at = 8 + n * h * 4;
    let client_ids = (0..n).map(|k| word(ids_at + 4 * k).expect("length checked")).collect();
    let flags_at = ids_at + 4 * n;
    let is_attacker = bytes[flags_at..].iter().map(|&b| b != 0).collect();
    Ok(ProjectionDump {
        n,
        h,
        coords,
        client_ids,
        is_attacker,
    })
}
