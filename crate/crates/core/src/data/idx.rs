use std::fs;
use std::path::Path;

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::TruncatedFile(format!("{what} header")))
}

fn check_magic(found: u32, expected: u32) -> Result<()> {
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

/// Parses an IDX3 image file into (count, rows*cols, pixels scaled to [0,1]).
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    check_magic(read_u32(bytes, 0, "image")?, IMAGE_MAGIC)?;
    let n = read_u32(bytes, 4, "image")? as usize;
    let rows = read_u32(bytes, 8, "image")? as usize;
    let cols = read_u32(bytes, 12, "image")? as usize;
    let dim = rows * cols;
    let body = &bytes[16..];
    if body.len() < n * dim {
        return Err(Error::TruncatedFile(format!(
            "expected {} pixel bytes, found {}",
            n * dim,
            body.len()
        )));
    }
    let pixels = body[..n * dim].iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok((n, dim, pixels))
}

/// Parses an IDX1 label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    check_magic(read_u32(bytes, 0, "label")?, LABEL_MAGIC)?;
    let n = read_u32(bytes, 4, "label")? as usize;
    let body = &bytes[8..];
    if body.len() < n {
        return Err(Error::TruncatedFile(format!(
            "expected {n} label bytes, found {}",
            body.len()
        )));
    }
    Ok(body[..n].iter().map(|&b| b as usize).collect())
}

/// Loads an image/label IDX pair. The class count is `max(label) + 1`, but
/// never less than 10 for byte-labelled digit sets.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let (n, dim, pixels) = parse_idx_images(&fs::read(images_path)?)?;
    let labels = parse_idx_labels(&fs::read(labels_path)?)?;
    if labels.len() != n {
        return Err(Error::CountMismatch {
            images: n,
            labels: labels.len(),
        });
    }
    let classes = labels.iter().copied().max().map_or(1, |m| m + 1).max(10);
    LabeledDataset::new(dim, classes, pixels, labels)
}

/// Encodes images as IDX3 bytes.
pub fn write_idx_images(rows: u32, cols: u32, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&rows.to_be_bytes());
    out.extend_from_slice(&cols.to_be_bytes());
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
