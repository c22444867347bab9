//! Child Drawing Development Optimization (CDDO) and its binary variant
//! (BCDDO) for wrapper feature selection.
//!
//! - [`cddo`]: the continuous population optimizer.
//! - [`binary`]: thresholded masks, the KNN wrapper fitness and the search driver.
//! - [`classify`]: KNN, stratified splits and confusion-matrix metrics.
//! - [`data`]: CSV loading, min-max scaling and data checks.
//! - [`harness`]: exhaustive oracle, random-search baseline, multi-seed experiments.

pub mod binary;
pub mod cddo;
pub mod classify;
pub mod config;
pub mod data;
pub mod error;
pub mod harness;
pub mod rng;
pub mod synthetic;

pub use binary::{
    binarize, repair_mask, select_features, wrapper_fitness, FeatureMask, FitnessWeights,
    Partition, SelectionResult,
};
pub use cddo::{optimize, Bounds, CddoParams, OptimizeResult, PatternMemory, Swarm};
pub use classify::{ConfusionMatrix, Metrics};
pub use config::RunConfig;
pub use data::{load_csv, Dataset, LabelColumn};
pub use error::{Error, Result};
pub use harness::{
    exhaustive_oracle, random_search, run_experiment, ExperimentReport, OracleResult,
};
