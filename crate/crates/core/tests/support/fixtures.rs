//! Constructed RFLBAT fixture: six near-identical attacker deltas and four
//! mutually dissimilar benign ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rflbat_core::aggregators::{rflbat_aggregate, AggregatorConfig, UpdateBatch};
use rflbat_core::learners::FlatUpdate;
use rflbat_core::numerics::cosine_similarity;

pub const ATTACKERS: [u32; 6] = [0, 1, 2, 3, 4, 5];
pub const BENIGN: [u32; 4] = [6, 7, 8, 9];
const DIM: usize = 32;

fn normal(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Attackers sit at `u` plus 1e-3 noise. Benign deltas are redrawn until
/// every benign pair has cosine below 0.5. All deltas have norm about 1.
pub fn pipeline_fixture(seed: u64) -> (Vec<Vec<f64>>, UpdateBatch) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = unit(normal(&mut rng, DIM));
    let mut rows: Vec<Vec<f64>> = (0..ATTACKERS.len())
        .map(|_| u.iter().zip(normal(&mut rng, DIM)).map(|(a, e)| a + 1e-3 * e).collect())
        .collect();
    let benign = loop {
        let cand: Vec<Vec<f64>> = (0..BENIGN.len()).map(|_| unit(normal(&mut rng, DIM))).collect();
        let ok = (0..cand.len()).all(|i| {
            (i + 1..cand.len()).all(|j| cosine_similarity(&cand[i], &cand[j]).unwrap() < 0.5)
        });
        if ok {
            break cand;
        }
    };
    rows.extend(benign);
    let updates = rows
        .iter()
        .enumerate()
        .map(|(i, d)| FlatUpdate {
            client_id: i as u32,
            delta: d.clone(),
            sample_count: 10,
        })
        .collect();
    (rows, UpdateBatch::new(updates, 0).expect("valid fixture"))
}

/// Median over members of their mean cosine to the other members.
pub fn v_cmed_oracle(rows: &[Vec<f64>], members: &[usize]) -> f64 {
    let mut v: Vec<f64> = members
        .iter()
        .map(|&i| {
            let s: f64 = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                    let na = rows[i].iter().map(|x| x * x).sum::<f64>().sqrt();
                    let nb = rows[j].iter().map(|x| x * x).sum::<f64>().sqrt();
                    dot / (na * nb)
                })
                .sum();
            s / (members.len() - 1) as f64
        })
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// Checks one noise seed: no attacker selected, the selection is benign and
/// non-empty, and the selected cluster's v_cmed is below the attackers'.
pub fn check_pipeline(seed: u64) -> Result<(), String> {
    let (rows, batch) = pipeline_fixture(seed);
    let out = rflbat_aggregate(&batch, &AggregatorConfig::default()).map_err(|e| e.to_string())?;
    if out.selected_ids.is_empty() {
        return Err(format!("seed {seed}: nothing selected"));
    }
    if let Some(a) = ATTACKERS.iter().find(|a| out.selected_ids.contains(a)) {
        return Err(format!("seed {seed}: attacker {a} selected in {:?}", out.selected_ids));
    }
    let attacker_idx: Vec<usize> = ATTACKERS.iter().map(|&a| a as usize).collect();
    let attacker_v = v_cmed_oracle(&rows, &attacker_idx);
    let chosen = out
        .selected_cluster
        .map(|c| out.cluster_report[c].v_cmed)
        .ok_or_else(|| format!("seed {seed}: no cluster selected"))?;
    if !(attacker_v > 0.999 && chosen < attacker_v) {
        return Err(format!("seed {seed}: selected v_cmed {chosen} not below attacker v_cmed {attacker_v}"));
    }
    Ok(())
}
