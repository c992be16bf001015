//! Density-peaks initialisation for K-means.
//!
//! The pipeline is: pairwise distances, truncation distance `dc`, local
//! density `rho`, separation `delta`, `gamma = rho * delta`, center
//! selection from the decision graph, then K-means whose assignment step
//! uses the conditionally positive definite kernel `-||x - y||^q`.
//! A seeded random-init Lloyd baseline and a benchmark harness sit
//! alongside it.

pub mod bench;
pub mod centers;
pub mod clustering;
pub mod config;
pub mod dataset;
pub mod density;
pub mod distance;
mod error;
pub mod exec;
pub mod serve;
pub mod synthetic;

pub use centers::{CenterSelection, SelectionMethod};
pub use clustering::{
    ClusteringResult, ImprovedConfig, IterationMode, KMeansConfig, KernelMetric,
};
pub use dataset::{Dataset, LabelColumn, LabelMatching, Normalization};
pub use density::{DensityKernel, DensityProfile};
pub use distance::{KernelSpec, PairwiseDistances};
pub use error::{Error, Result};
pub use exec::Exec;
