//! Numerical kernels shared by the aggregation rules.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! many threads at once.

mod cluster;
mod geomed;
mod matrix;
mod pca;
mod scoring;

pub use cluster::{choose_k, choose_k_with, kmeans, kmeans_with, silhouette, Clustering, KMeansConfig};
pub use geomed::{
    geometric_median, smoothed_objective, weighted_geometric_median, weiszfeld, WeiszfeldConfig,
    WeiszfeldResult,
};
pub use matrix::{euclidean, squared_euclidean, Matrix};
pub use pca::{pca_project, ProjectionResult};
pub use scoring::{cosine_similarity, distance_sum_scores, median, median_ratio_filter};
