use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::seeding;

/// Supported model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Architecture {
    LogisticRegression { inputs: usize, classes: usize },
    /// One ReLU hidden layer.
    Mlp { inputs: usize, hidden: usize, classes: usize },
}

impl Architecture {
    /// `(rows, cols, has_bias)` of each dense layer, input side first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize, bool)> {
        match *self {
            Architecture::LogisticRegression { inputs, classes } => vec![(inputs, classes, true)],
            Architecture::Mlp { inputs, hidden, classes } => {
                vec![(inputs, hidden, true), (hidden, classes, true)]
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(r, c, b)| r * c + if b { c } else { 0 })
            .sum()
    }

    pub fn classes(&self) -> usize {
        match *self {
            Architecture::LogisticRegression { classes, .. } | Architecture::Mlp { classes, .. } => {
                classes
            }
        }
    }
}

/// Dense layer: `weights` is rows x cols, row-major, rows = fan-in.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub architecture: Architecture,
    pub layers: Vec<Layer>,
}

impl ModelParams {
    pub fn zeros(architecture: Architecture) -> Self {
        let layers = architecture
            .layer_shapes()
            .into_iter()
            .map(|(rows, cols, has_bias)| Layer {
                rows,
                cols,
                weights: vec![0.0; rows * cols],
                bias: has_bias.then(|| vec![0.0; cols]),
            })
            .collect();
        Self { architecture, layers }
    }

    pub fn param_count(&self) -> usize {
        self.architecture.param_count()
    }

    /// `self += scale * flat`, with `flat` in [`flatten`] order.
    pub fn add_scaled(&mut self, scale: f64, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                actual: flat.len(),
            });
        }
        let mut it = flat.iter();
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut().flatten()) {
                *w += scale * it.next().expect("length checked");
            }
        }
        Ok(())
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).pop().expect("at least one layer")
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    /// Activations after each layer (ReLU on hidden layers, raw logits last).
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let input: &[f64] = if l == 0 { x } else { &acts[l - 1] };
            let mut out = layer.bias.clone().unwrap_or_else(|| vec![0.0; layer.cols]);
            for (r, &xi) in input.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let w = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                for (o, wv) in out.iter_mut().zip(w) {
                    *o += xi * wv;
                }
            }
            if l != last {
                for o in &mut out {
                    *o = o.max(0.0);
                }
            }
            acts.push(out);
        }
        acts
    }
}

/// Lowest index wins ties.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Seeded initialisation: LR weights ~ N(0, 0.01^2); MLP layers use He
/// scaling. Biases start at zero.
pub fn build_model(architecture: Architecture, seed: u64) -> ModelParams {
    let mut params = ModelParams::zeros(architecture);
    let mut rng = seeding::rng(seeding::derive(seed, &[0x30de1]));
    let is_lr = matches!(architecture, Architecture::LogisticRegression { .. });
    for layer in &mut params.layers {
        let std = if is_lr { 0.01 } else { (2.0 / layer.rows as f64).sqrt() };
        let normal = Normal::new(0.0, std).expect("positive std");
        for w in &mut layer.weights {
            *w = normal.sample(&mut rng);
        }
    }
    params
}

/// Layer by layer: weights row-major, then bias.
pub fn flatten(params: &ModelParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.param_count());
    for layer in &params.layers {
        out.extend_from_slice(&layer.weights);
        if let Some(b) = &layer.bias {
            out.extend_from_slice(b);
        }
    }
    out
}

pub fn unflatten(flat: &[f64], architecture: Architecture) -> Result<ModelParams> {
    let mut params = ModelParams::zeros(architecture);
    if flat.len() != params.param_count() {
        return Err(Error::LengthMismatch {
            expected: params.param_count(),
            actual: flat.len(),
        });
    }
    let mut it = flat.iter();
    for layer in &mut params.layers {
        for w in layer.weights.iter_mut().chain(layer.bias.iter_mut().flatten()) {
            *w = *it.next().expect("length checked");
        }
    }
    Ok(params)
}

/// Mean softmax cross-entropy over `batch` and its gradient in flatten order.
pub fn loss_and_gradient<X: AsRef<[f64]>>(
    params: &ModelParams,
    batch: &[(X, usize)],
) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; params.param_count()];
    let mut offsets = Vec::with_capacity(params.layers.len());
    let mut off = 0;
    for layer in &params.layers {
        offsets.push(off);
        off += layer.rows * layer.cols + layer.bias.as_ref().map_or(0, Vec::len);
    }
    let mut loss = 0.0;
    let scale = 1.0 / batch.len().max(1) as f64;
    for (x, y) in batch {
        let x = x.as_ref();
        let acts = params.forward(x);
        let logits = acts.last().expect("at least one layer");
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        loss -= (exps[*y] / sum).ln() * scale;

        let mut delta: Vec<f64> = exps.iter().map(|e| e / sum).collect();
        delta[*y] -= 1.0;
        for l in (0..params.layers.len()).rev() {
            let layer = &params.layers[l];
            let input: &[f64] = if l == 0 { x } else { &acts[l - 1] };
            let g = &mut grad[offsets[l]..];
            for (r, &xi) in input.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                for (gw, d) in g[r * layer.cols..(r + 1) * layer.cols].iter_mut().zip(&delta) {
                    *gw += scale * xi * d;
                }
            }
            if layer.bias.is_some() {
                let b = &mut g[layer.rows * layer.cols..layer.rows * layer.cols + layer.cols];
                for (gb, d) in b.iter_mut().zip(&delta) {
                    *gb += scale * d;
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; layer.rows];
                for (r, p) in prev.iter_mut().enumerate() {
                    if input[r] <= 0.0 {
                        continue;
                    }
                    let w = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    *p = w.iter().zip(&delta).map(|(a, b)| a * b).sum();
                }
                delta = prev;
            }
        }
    }
    (loss, grad)
}

/// Fraction of samples whose argmax prediction matches the label.
pub fn evaluate(params: &ModelParams, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let correct = (0..data.len())
        .filter(|&i| params.predict(data.row(i)) == data.label(i))
        .count();
    Ok(correct as f64 / data.len() as f64)
}
