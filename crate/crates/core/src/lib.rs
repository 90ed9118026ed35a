//! Supervised nonlinear mapping of labeled dissimilarity data into 2-D.
//!
//! Pairs from the same class are weighted by their input distance and pairs
//! from different classes by their map distance, so that unavoidable
//! distortions show up as tears between classes and as false neighbourhoods
//! inside classes.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod optimizer;
mod parallel;
pub mod plot;
pub mod stress;
pub mod weighting;

pub use error::{Error, Result};
pub use geometry::{
    co_membership, map_dissimilarities, map_distances, pairwise_stats, CoMembership, DissimilarityMatrix, Embedding,
    LabelVector, Metric, PairStats,
};
pub use optimizer::{anneal_state, initialize, run, EpochRecord, Init, OptimizerConfig, RunTrace};
pub use stress::{local_stress, stress_gradient, total_stress, Objective, PairStressTerm, StressMode};
pub use weighting::{lambda_at, weight_f, weight_f_derivative, weight_params, WeightParams};
