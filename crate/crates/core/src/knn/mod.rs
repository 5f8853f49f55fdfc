//! Exact k-nearest-neighbor search under the Euclidean metric.
//!
//! [`build_neighbor_table`] is the production path: squared distances are
//! produced block by block through `‖a‖² + ‖b‖² − 2a·b`, a rounding-error
//! bound on that expansion prunes each row down to a small candidate set, and
//! the survivors are re-measured directly as `sqrt(Σ (a_t − b_t)²)`. The
//! result is therefore exact in the same sense as [`naive_neighbor_oracle`],
//! and does not depend on block sizes or on the number of worker threads.
//!
//! Memory use is the `N × d` input plus one `query_block × N` buffer per
//! worker.

mod kernel;
mod naive;

use rayon::prelude::*;

use crate::scalar::cmp_finite;
use crate::{Error, Result, Scalar};

pub use kernel::dot;
pub use naive::naive_neighbor_oracle;

/// `n_points × n_dims` row-major matrix of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    n_points: usize,
    n_dims: usize,
    values: Vec<T>,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(n_points: usize, n_dims: usize, values: Vec<T>) -> Result<Self> {
        if n_points == 0 || n_dims == 0 {
            return Err(Error::InvalidData(format!(
                "need at least one point and one dimension, got {n_points} x {n_dims}"
            )));
        }
        if n_points.checked_mul(n_dims) != Some(values.len()) {
            return Err(Error::InconsistentDims(format!(
                "{} values cannot fill {n_points} x {n_dims}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value at row {}, column {}",
                pos / n_dims,
                pos % n_dims
            )));
        }
        Ok(DataMatrix {
            n_points,
            n_dims,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let n_dims = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_dims);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_dims {
                return Err(Error::InconsistentDims(format!(
                    "row {i} has {} values, expected {n_dims}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), n_dims, values)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n_dims..(i + 1) * self.n_dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.values.chunks_exact(self.n_dims)
    }

    /// Keeps the rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n_dims);
        for &i in indices {
            if i >= self.n_points {
                return Err(Error::InconsistentDims(format!(
                    "row {i} requested from a matrix with {} rows",
                    self.n_points
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.n_dims, values)
    }

    pub fn cast<U: Scalar>(&self) -> DataMatrix<U> {
        DataMatrix {
            n_points: self.n_points,
            n_dims: self.n_dims,
            values: self
                .values
                .iter()
                .map(|v| U::from_f64_lossy(v.to_f64_exact()))
                .collect(),
        }
    }
}

/// Per-point sorted distances to the `k` nearest other points.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable<T> {
    n_points: usize,
    k: usize,
    distances: Vec<T>,
    neighbor_ids: Vec<usize>,
}

impl<T: Scalar> NeighborTable<T> {
    /// Assembles a table from flat row-major `n_points × k` arrays, checking
    /// every structural invariant.
    pub fn from_parts(
        n_points: usize,
        k: usize,
        distances: Vec<T>,
        neighbor_ids: Vec<usize>,
    ) -> Result<Self> {
        if k == 0 || distances.len() != n_points * k || neighbor_ids.len() != n_points * k {
            return Err(Error::InconsistentDims(format!(
                "neighbor table of {n_points} points with k={k} needs {} entries",
                n_points * k
            )));
        }
        let mut zero_pairs = Vec::new();
        for i in 0..n_points {
            let d = &distances[i * k..(i + 1) * k];
            let ids = &neighbor_ids[i * k..(i + 1) * k];
            if d.iter().any(|v| !v.is_finite() || *v < T::zero()) {
                return Err(Error::InvalidData(format!(
                    "point {i}: distances must be finite and non-negative"
                )));
            }
            if d.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidData(format!(
                    "point {i}: distances not sorted"
                )));
            }
            for (pos, &j) in ids.iter().enumerate() {
                if j == i || ids[..pos].contains(&j) {
                    return Err(Error::InvalidData(format!(
                        "point {i}: neighbor list repeats an index or contains itself"
                    )));
                }
                if d[pos] == T::zero() {
                    zero_pairs.push((i.min(j), i.max(j)));
                }
            }
        }
        if !zero_pairs.is_empty() {
            zero_pairs.sort_unstable();
            zero_pairs.dedup();
            return Err(Error::DuplicatePoints(zero_pairs));
        }
        Ok(NeighborTable {
            n_points,
            k,
            distances,
            neighbor_ids,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `T_1 ≤ … ≤ T_k` for point `i`.
    pub fn distances(&self, i: usize) -> &[T] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbor_ids[i * self.k..(i + 1) * self.k]
    }

    pub fn all_distances(&self) -> &[T] {
        &self.distances
    }

    pub fn all_neighbor_ids(&self) -> &[usize] {
        &self.neighbor_ids
    }
}

/// Block sizes for the chunked search. None of them affects the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnConfig {
    /// Query rows processed together; each worker holds `query_block × N`
    /// squared distances.
    pub query_block: usize,
    /// Candidate rows per inner block.
    pub col_block: usize,
    /// Coordinates per cache tile of the inner product.
    pub dim_tile: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            query_block: 64,
            col_block: 32,
            dim_tile: 512,
        }
    }
}

pub(crate) fn check_k(n_points: usize, k: usize) -> Result<()> {
    let max = n_points.saturating_sub(1);
    if k < 2 || k > max {
        return Err(Error::InvalidK { k, min: 2, max });
    }
    Ok(())
}

pub fn build_neighbor_table<T: Scalar>(data: &DataMatrix<T>, k: usize) -> Result<NeighborTable<T>> {
    build_neighbor_table_with(data, k, &KnnConfig::default())
}

pub fn build_neighbor_table_with<T: Scalar>(
    data: &DataMatrix<T>,
    k: usize,
    config: &KnnConfig,
) -> Result<NeighborTable<T>> {
    let n = data.n_points();
    let dim = data.n_dims();
    check_k(n, k)?;

    let query_block = config.query_block.max(1);
    let col_block = config.col_block.max(1);
    let values = data.values();

    let norms: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| dot(data.row(i), data.row(i)))
        .collect();

    // |fl(‖a‖² + ‖b‖² − 2a·b) − ‖a − b‖²| ≤ slack · (‖a‖² + ‖b‖²), with a wide
    // margin over the textbook γ_d bound.
    let slack = T::from_f64_lossy(4.0 * (dim as f64 + 16.0)) * T::epsilon();

    let blocks: Vec<(Vec<T>, Vec<usize>)> = (0..n)
        .step_by(query_block)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + query_block).min(n);
            let mut buf = vec![T::zero(); (end - start) * n];
            let mut scratch = Vec::new();
            let mut j0 = 0;
            while j0 < n {
                let j1 = (j0 + col_block).min(n);
                kernel::block_dots(
                    values,
                    dim,
                    start..end,
                    j0..j1,
                    config.dim_tile,
                    &mut scratch,
                    &mut buf[j0..],
                    n,
                );
                j0 = j1;
            }
            let two = T::one() + T::one();
            let mut dists = Vec::with_capacity((end - start) * k);
            let mut ids = Vec::with_capacity((end - start) * k);
            for i in start..end {
                let row = &mut buf[(i - start) * n..(i - start + 1) * n];
                let na = norms[i];
                for (j, v) in row.iter_mut().enumerate() {
                    let e = na + norms[j] - two * *v;
                    *v = if e < T::zero() { T::zero() } else { e };
                }
                let (d, id) = select_row(data, i, row, &norms, na, slack, k);
                dists.extend(d);
                ids.extend(id);
            }
            (dists, ids)
        })
        .collect();

    let mut distances = Vec::with_capacity(n * k);
    let mut neighbor_ids = Vec::with_capacity(n * k);
    for (d, id) in blocks {
        distances.extend(d);
        neighbor_ids.extend(id);
    }
    NeighborTable::from_parts(n, k, distances, neighbor_ids)
}

/// Picks the `k` nearest points to `i` given approximate squared distances.
fn select_row<T: Scalar>(
    data: &DataMatrix<T>,
    i: usize,
    approx: &[T],
    norms: &[T],
    na: T,
    slack: T,
    k: usize,
) -> (Vec<T>, Vec<usize>) {
    // Upper bounds on the true squared distances; the k-th smallest bounds
    // the true k-th neighbor distance from above.
    let mut upper: Vec<T> = approx
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &e)| e + slack * (na + norms[j]))
        .collect();
    let (_, &mut cutoff, _) = upper.select_nth_unstable_by(k - 1, cmp_finite);

    let a = data.row(i);
    let mut cands: Vec<(T, usize)> = approx
        .iter()
        .enumerate()
        .filter(|&(j, &e)| j != i && e - slack * (na + norms[j]) <= cutoff)
        .map(|(j, _)| (exact_distance(a, data.row(j)), j))
        .collect();
    cands.sort_unstable_by(|x, y| cmp_finite(&x.0, &y.0).then(x.1.cmp(&y.1)));
    cands.truncate(k);
    cands.into_iter().unzip()
}

#[inline]
fn exact_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        s = s + d * d;
    }
    s.sqrt()
}
