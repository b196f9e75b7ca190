//! Estimation of the joint law of componentwise ranks through sub-sampling.
//!
//! A d-dimensional sample is reduced to its rank grid: for every size-`m`
//! sub-sample, each observation's vector of within-sub-sample ranks marks a
//! cell of `{1..m}^d`, and the grid averages these marks over sub-samples.
//! On top of the estimator the crate provides exact null moments of the L²
//! distance to independence, a Monte-Carlo-calibrated Kullback–Leibler
//! independence test, and a Bernstein-smoothed copula density that can be
//! turned back into a joint density on the data scale.

pub mod error;
pub mod estimator;
pub mod exact;
pub mod experiments;
pub mod generators;
pub mod grid;
pub mod independence;
pub mod io;
pub mod null_theory;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod smoothing;

pub use error::{Error, Result};
pub use estimator::{
    estimate, estimate_exhaustive, estimate_random, exhaustive_counts, random_counts,
    subsample_rank_set, EstimatorConfig, Strategy, DEFAULT_ENUMERATION_CAP,
};
pub use exact::{BernsteinIndex, ExactRational};
pub use grid::{merge_grids, RankCounts, RankGrid, RankVector};
pub use independence::{
    calibrate_null, independence_test, kl_statistic, l2_statistic, NullCalibration,
    StatisticKind, TestResult,
};
pub use null_theory::{NullMoments, VarianceVariant};
pub use sample::{component_ranks, SampleMatrix, TiePolicy};
