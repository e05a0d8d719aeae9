use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{AggregationOutcome, AggregatorConfig, ClusterReport, UpdateBatch};
use crate::error::{Error, Result};
use crate::numerics::{
    choose_k_with, cosine_similarity, distance_sum_scores, kmeans_with, median, median_ratio_filter,
    pca_project, Matrix,
};
use crate::seeding;

/// PCA, distance-ratio filtering, KMeans, cosine-based cluster selection,
/// a second filter inside the chosen cluster, then a weighted mean.
///
/// Updates are processed in ascending client-id order so that the result
/// does not depend on arrival order.
pub fn rflbat_aggregate(batch: &UpdateBatch, cfg: &AggregatorConfig) -> Result<AggregationOutcome> {
    let n = batch.len();
    if n < 3 {
        return Err(Error::TooFewClients { got: n, need: 3 });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| batch.updates[i].client_id);
    let sorted = UpdateBatch {
        updates: order.iter().map(|&i| batch.updates[i].clone()).collect(),
        round: batch.round,
    };
    let deltas = sorted.matrix();

    let h = cfg.h.min(n - 1).min(deltas.cols());
    let projection = pca_project(&deltas, h)?.projected;

    // pass 1 over everyone
    let scores = distance_sum_scores(&projection)?;
    let survivors = median_ratio_filter(&scores, cfg.eps1);
    let excluded_pass1 = complement(&sorted, &survivors, &(0..n).collect::<Vec<_>>());

    // cluster the survivors' projections
    let seed = seeding::derive(cfg.kmeans_seed, &[batch.round as u64]);
    let survivor_points = projection.select_rows(&survivors);
    let (assignment, k) = if survivors.len() >= 2 {
        let k = choose_k_with(&survivor_points, seed, &cfg.kmeans)?;
        let k = k.min(survivors.len());
        (kmeans_with(&survivor_points, k, seed, &cfg.kmeans)?.assignment, k)
    } else {
        (vec![0; survivors.len()], 1)
    };
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, &c) in assignment.iter().enumerate() {
        clusters[c].push(survivors[pos]);
    }

    let v_cmed: Vec<f64> = clusters
        .par_iter()
        .map(|members| cluster_similarity(&deltas, members))
        .collect::<Result<_>>()?;
    let cluster_report: Vec<ClusterReport> = clusters
        .iter()
        .zip(&v_cmed)
        .map(|(members, &v)| ClusterReport {
            member_ids: members.iter().map(|&i| sorted.updates[i].client_id).collect(),
            v_cmed: v,
        })
        .collect();

    let mut selected_cluster = None;
    for (c, members) in clusters.iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        if selected_cluster.is_none_or(|s: usize| v_cmed[c] < v_cmed[s]) {
            selected_cluster = Some(c);
        }
    }
    let candidates = match selected_cluster {
        Some(c) => clusters[c].clone(),
        None => survivors.clone(),
    };

    // pass 2 inside the chosen group, on projected coordinates
    let chosen = if candidates.len() >= 2 {
        let scores = distance_sum_scores(&projection.select_rows(&candidates))?;
        median_ratio_filter(&scores, cfg.eps2)
            .into_iter()
            .map(|p| candidates[p])
            .collect()
    } else {
        candidates.clone()
    };
    let excluded_pass2 = complement(&sorted, &chosen, &candidates);
    if chosen.is_empty() {
        return Err(Error::AllExcluded(batch.round));
    }

    let global_delta = sorted.weighted_mean(&chosen);
    let total: f64 = chosen.iter().map(|&i| sorted.updates[i].sample_count as f64).sum();
    let selected_ids = sorted.ids_of(&chosen);

    // report weights and projection rows in the caller's order
    let mut weights = vec![0.0; n];
    let mut projected_rows = vec![Vec::new(); n];
    for (sorted_pos, &orig) in order.iter().enumerate() {
        if chosen.contains(&sorted_pos) {
            weights[orig] = sorted.updates[sorted_pos].sample_count as f64 / total;
        }
        projected_rows[orig] = projection.row(sorted_pos).to_vec();
    }

    Ok(AggregationOutcome {
        global_delta,
        selected_ids,
        excluded_pass1,
        excluded_pass2,
        cluster_report,
        selected_cluster,
        projection: Some(Matrix::from_rows(&projected_rows)?),
        weights,
    })
}

/// Median over members of each member's mean cosine similarity to the rest
/// of the cluster, on the original deltas. Singletons score +1.
fn cluster_similarity(deltas: &Matrix, members: &[usize]) -> Result<f64> {
    if members.len() < 2 {
        return Ok(1.0);
    }
    let mut means = Vec::with_capacity(members.len());
    for &j in members {
        let mut sum = 0.0;
        for &other in members {
            if other != j {
                sum += cosine_similarity(deltas.row(j), deltas.row(other))?;
            }
        }
        means.push(sum / (members.len() - 1) as f64);
    }
    Ok(median(&means).expect("non-empty"))
}

fn complement(batch: &UpdateBatch, kept: &[usize], pool: &[usize]) -> BTreeSet<crate::ClientId> {
    pool.iter()
        .filter(|i| !kept.contains(i))
        .map(|&i| batch.updates[i].client_id)
        .collect()
}
