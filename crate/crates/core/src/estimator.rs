//! Maximum-likelihood intrinsic dimension from nearest-neighbor distances.
//!
//! Neighbors of a point are modeled as a locally homogeneous Poisson process
//! on an `m`-dimensional ball whose radius is the distance to the `k`-th
//! neighbor. For one point the likelihood is maximized by
//!
//! ```text
//! m̂_k(x) = [ 1/(k−1) · Σ_{j<k} ln(T_k(x) / T_j(x)) ]⁻¹
//! ```
//!
//! and the dataset estimate pools the inverse local estimates:
//!
//! ```text
//! m̂_k = [ 1/(N(k−1)) · Σ_i Σ_{j<k} ln(T_k(x_i) / T_j(x_i)) ]⁻¹
//! ```
//!
//! i.e. the harmonic mean of the local estimates.

use rayon::prelude::*;
use serde::Serialize;

use crate::knn::{self, DataMatrix, KnnConfig, NeighborTable};
use crate::{Error, Result, Scalar};

/// Neighborhood size used unless the caller overrides it.
pub const DEFAULT_K: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimatorOptions {
    /// Normalize the log-ratio sums by `k − 2` instead of `k − 1`, which
    /// removes the first-order bias of the local estimator. Off by default.
    pub bias_corrected: bool,
}

impl EstimatorOptions {
    fn normalizer(&self, k: usize) -> Result<usize> {
        if self.bias_corrected {
            if k < 3 {
                return Err(Error::InvalidK {
                    k,
                    min: 3,
                    max: usize::MAX,
                });
            }
            Ok(k - 2)
        } else {
            Ok(k - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdEstimate<T> {
    pub global_id: T,
    pub per_point_ids: Vec<T>,
    pub k: usize,
    pub n_points: usize,
}

impl<T: Scalar> IdEstimate<T> {
    /// `[mean_i 1/m̂(x_i)]⁻¹`, evaluated independently of `global_id`.
    pub fn harmonic_mean_of_local(&self) -> T {
        let inv_sum: T = self.per_point_ids.iter().map(|m| m.recip()).sum();
        T::from_usize_lossy(self.per_point_ids.len()) / inv_sum
    }
}

/// `Σ_{j<k} ln(T_k / T_j)` for one sorted distance profile.
pub fn log_ratio_sum<T: Scalar>(distances: &[T]) -> T {
    let (&tk, rest) = distances.split_last().expect("empty distance profile");
    let mut s = T::zero();
    for &tj in rest {
        s = s + (tk / tj).ln();
    }
    s
}

pub fn local_id<T: Scalar>(neighbors: &NeighborTable<T>, point: usize) -> Result<T> {
    local_id_with(neighbors, point, &EstimatorOptions::default())
}

pub fn local_id_with<T: Scalar>(
    neighbors: &NeighborTable<T>,
    point: usize,
    options: &EstimatorOptions,
) -> Result<T> {
    if point >= neighbors.n_points() {
        return Err(Error::InvalidData(format!(
            "point {point} out of range for {} points",
            neighbors.n_points()
        )));
    }
    let norm = options.normalizer(neighbors.k())?;
    let s = log_ratio_sum(neighbors.distances(point));
    if s <= T::zero() {
        return Err(Error::DegenerateNeighborhood { point });
    }
    Ok(T::from_usize_lossy(norm) / s)
}

pub fn global_id<T: Scalar>(neighbors: &NeighborTable<T>) -> Result<IdEstimate<T>> {
    global_id_with(neighbors, &EstimatorOptions::default())
}

/// Pools every point; any degenerate neighborhood is an error rather than
/// being dropped, so `N` always equals the table size.
pub fn global_id_with<T: Scalar>(
    neighbors: &NeighborTable<T>,
    options: &EstimatorOptions,
) -> Result<IdEstimate<T>> {
    let n = neighbors.n_points();
    let k = neighbors.k();
    let norm = T::from_usize_lossy(options.normalizer(k)?);

    let sums: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| log_ratio_sum(neighbors.distances(i)))
        .collect();
    if let Some(point) = sums.iter().position(|s| *s <= T::zero()) {
        return Err(Error::DegenerateNeighborhood { point });
    }

    // Sequential in point order, independent of the worker count.
    let mut total = T::zero();
    for &s in &sums {
        total = total + s;
    }
    let global_id = T::from_usize_lossy(n) * norm / total;
    if !global_id.is_finite() {
        return Err(Error::DegenerateNeighborhood { point: 0 });
    }

    Ok(IdEstimate {
        global_id,
        per_point_ids: sums.iter().map(|&s| norm / s).collect(),
        k,
        n_points: n,
    })
}

pub fn estimate_dataset<T: Scalar>(data: &DataMatrix<T>, k: usize) -> Result<IdEstimate<T>> {
    estimate_dataset_with(data, k, &EstimatorOptions::default(), &KnnConfig::default())
}

pub fn estimate_dataset_with<T: Scalar>(
    data: &DataMatrix<T>,
    k: usize,
    options: &EstimatorOptions,
    knn_config: &KnnConfig,
) -> Result<IdEstimate<T>> {
    options.normalizer(k)?;
    let table = knn::build_neighbor_table_with(data, k, knn_config)?;
    global_id_with(&table, options)
}
