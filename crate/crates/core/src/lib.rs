//! Intrinsic dimension estimation for high-dimensional point sets.
//!
//! The pipeline is: load or synthesize a [`DataMatrix`], build an exact
//! k-nearest-neighbor table ([`knn`]), and aggregate the per-point
//! maximum-likelihood estimates into a dataset-level intrinsic dimension
//! ([`estimator`]). The [`analysis`] module fits generalization ability of
//! trained classifiers against dataset intrinsic dimension.
//!
//! Numerical code is generic over the scalar type (see [`Scalar`]); the
//! aliases at the crate root pin the 64-bit types that the file formats and
//! the command-line tool use.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod ingest;
pub mod knn;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use analysis::{Domain, ExperimentRecord, FitMode, GroupBy, GroupedFits, RegressionFit};
pub use estimator::{EstimatorOptions, DEFAULT_K};
pub use ingest::{ChannelPolicy, LabeledCollection, PreprocessSpec};
pub use knn::KnnConfig;
pub use synthetic::{ManifoldKind, ManifoldSpec};

/// Row-major 64-bit point set.
pub type DataMatrix = knn::DataMatrix<f64>;
/// Row-major 32-bit point set.
pub type DataMatrixF32 = knn::DataMatrix<f32>;
pub type NeighborTable = knn::NeighborTable<f64>;
pub type NeighborTableF32 = knn::NeighborTable<f32>;
pub type IdEstimate = estimator::IdEstimate<f64>;
pub type IdEstimateF32 = estimator::IdEstimate<f32>;
pub type LinearFit = analysis::ols::LinearFit<f64>;
