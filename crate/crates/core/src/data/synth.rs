use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seeding;

/// Gaussian blobs with unit noise, one mean per class, class means at
/// pairwise distance at least `separation`. Samples are shuffled.
pub fn synth_dataset(
    class_count: usize,
    per_class: usize,
    feature_dim: usize,
    separation: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if class_count == 0 || per_class == 0 || feature_dim == 0 {
        return Err(Error::InvalidConfig(
            "synthetic dataset counts must be at least 1".into(),
        ));
    }
    let mut rng = seeding::rng(seeding::derive(seed, &[0x5157]));
    let mut means: Vec<Vec<f64>> = (0..class_count)
        .map(|_| {
            (0..feature_dim)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect()
        })
        .collect();
    if class_count > 1 {
        let mut closest = f64::INFINITY;
        for i in 0..class_count {
            for j in (i + 1)..class_count {
                closest = closest.min(crate::numerics::euclidean(&means[i], &means[j]));
            }
        }
        if closest > 0.0 {
            let s = separation / closest;
            for m in &mut means {
                for x in m.iter_mut() {
                    *x *= s;
                }
            }
        }
    }

    let n = class_count * per_class;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut features = Vec::with_capacity(n * feature_dim);
    let mut labels = Vec::with_capacity(n);
    for &slot in &order {
        let class = slot / per_class;
        for &mu in &means[class] {
            let noise: f64 = StandardNormal.sample(&mut rng);
            features.push(mu + noise);
        }
        labels.push(class);
    }
    LabeledDataset::new(feature_dim, class_count, features, labels)
}

/// Little-endian encoding: `u32 n, u32 F, u32 classes`, then `n*F` f32
/// features, then `n` u16 labels.
pub fn write_synthetic(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(12 + ds.features().len() * 4 + ds.len() * 2);
    out.extend_from_slice(&(ds.len() as u32).to_le_bytes());
    out.extend_from_slice(&(ds.feature_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(ds.class_count() as u32).to_le_bytes());
    for &f in ds.features() {
        out.extend_from_slice(&(f as f32).to_le_bytes());
    }
    for &l in ds.labels() {
        out.extend_from_slice(&(l as u16).to_le_bytes());
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_synthetic(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let bytes = fs::read(path)?;
    let header = |i: usize| -> Result<usize> {
        bytes
            .get(i * 4..i * 4 + 4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
            .ok_or_else(|| Error::TruncatedFile("synthetic header".into()))
    };
    let (n, dim, classes) = (header(0)?, header(1)?, header(2)?);
    let feat_end = 12 + n * dim * 4;
    let end = feat_end + n * 2;
    if bytes.len() < end {
        return Err(Error::TruncatedFile(format!(
            "expected {end} bytes, found {}",
            bytes.len()
        )));
    }
    let features = bytes[12..feat_end]
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect();
    let labels = bytes[feat_end..end]
        .chunks_exact(2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]) as usize)
        .collect();
    LabeledDataset::new(dim, classes, features, labels)
}
