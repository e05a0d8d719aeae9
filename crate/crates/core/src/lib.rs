//! Deterministic federated-learning simulation with backdoor attacks and
//! robust aggregation.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] holds the pure kernels (PCA, KMeans, distance scores,
//!   cosine similarity, Weiszfeld geometric median).
//! * [`learners`] holds model parameterisation and local SGD.
//! * [`data`] loads and partitions datasets and applies backdoor triggers.
//! * [`aggregators`] implements the server-side rules behind one interface.
//! * [`simulator`] drives federated rounds and records metrics.

pub mod aggregators;
pub mod data;
pub mod error;
pub mod learners;
pub mod numerics;
pub mod simulator;

mod seeding;

pub use error::{Error, Result};

/// Identifier of a participating client.
pub type ClientId = u32;
