use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// One trigger pixel at image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerCell {
    pub row: usize,
    pub col: usize,
    pub intensity: f64,
}

/// Backdoor trigger: pixel overwrites plus the label the attacker wants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerPattern {
    /// Image width used to turn (row, col) into a feature index.
    pub width: usize,
    pub cells: Vec<TriggerCell>,
    pub target_label: usize,
}

impl TriggerPattern {
    /// Two 2x2 blocks in the lower-left corner of a 28x28 image: rows 24-25
    /// by cols 0-1, and rows 26-27 by cols 2-3. Target label 0.
    pub fn lower_left(intensity: f64) -> Self {
        let mut cells = Vec::with_capacity(8);
        for (rows, cols) in [((24, 26), (0, 2)), ((26, 28), (2, 4))] {
            for row in rows.0..rows.1 {
                for col in cols.0..cols.1 {
                    cells.push(TriggerCell { row, col, intensity });
                }
            }
        }
        Self {
            width: 28,
            cells,
            target_label: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn feature_index(&self, cell: &TriggerCell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn apply_in_place(&self, row: &mut [f64]) -> Result<()> {
        for cell in &self.cells {
            let idx = self.feature_index(cell);
            if idx >= row.len() || cell.col >= self.width {
                return Err(Error::OutOfBounds {
                    index: idx,
                    len: row.len(),
                });
            }
        }
        for cell in &self.cells {
            row[self.feature_index(cell)] = cell.intensity;
        }
        Ok(())
    }
}

/// Copy of `row` with the pattern's pixels overwritten.
pub fn apply_trigger(row: &[f64], pattern: &TriggerPattern) -> Result<Vec<f64>> {
    let mut out = row.to_vec();
    pattern.apply_in_place(&mut out)?;
    Ok(out)
}

/// Splits a pattern into `parts` groups of near-equal size, walking the
/// cells column by column so each group is a contiguous strip.
pub fn split_dba(pattern: &TriggerPattern, parts: usize) -> Result<Vec<TriggerPattern>> {
    if parts == 0 || pattern.len() < parts {
        return Err(Error::PatternTooSmall {
            size: pattern.len(),
            parts,
        });
    }
    if parts == 1 {
        return Ok(vec![pattern.clone()]);
    }
    let mut cells = pattern.cells.clone();
    cells.sort_by_key(|c| (c.col, c.row));
    let base = cells.len() / parts;
    let extra = cells.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let size = base + usize::from(p < extra);
        out.push(TriggerPattern {
            width: pattern.width,
            cells: cells[start..start + size].to_vec(),
            target_label: pattern.target_label,
        });
        start += size;
    }
    Ok(out)
}

/// Clean test samples whose original label differs from the target, with the
/// trigger stamped on. Labels keep the original ground truth.
#[derive(Debug, Clone)]
pub struct TriggeredTestSet {
    pub samples: LabeledDataset,
    pub target_label: usize,
}

impl TriggeredTestSet {
    pub fn build(clean: &LabeledDataset, pattern: &TriggerPattern) -> Result<Self> {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..clean.len() {
            if clean.label(i) == pattern.target_label {
                continue;
            }
            features.extend(apply_trigger(clean.row(i), pattern)?);
            labels.push(clean.label(i));
        }
        Ok(Self {
            samples: LabeledDataset::new(clean.feature_dim(), clean.class_count(), features, labels)?,
            target_label: pattern.target_label,
        })
    }
}
