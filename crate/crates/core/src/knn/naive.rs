//! Unoptimized reference search used to check the blocked kernel.

use super::{check_k, DataMatrix, NeighborTable};
use crate::{Result, Scalar};

/// Full `O(N² d)` scan with a complete sort per point. Same contract as
/// [`super::build_neighbor_table`].
pub fn naive_neighbor_oracle<T: Scalar>(
    data: &DataMatrix<T>,
    k: usize,
) -> Result<NeighborTable<T>> {
    let n = data.n_points();
    check_k(n, k)?;
    let mut distances = Vec::with_capacity(n * k);
    let mut neighbor_ids = Vec::with_capacity(n * k);
    for i in 0..n {
        let mut all = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut s = T::zero();
            for t in 0..data.n_dims() {
                let diff = data.row(i)[t] - data.row(j)[t];
                s = s + diff * diff;
            }
            all.push((s.sqrt(), j));
        }
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(d, j) in &all[..k] {
            distances.push(d);
            neighbor_ids.push(j);
        }
    }
    NeighborTable::from_parts(n, k, distances, neighbor_ids)
}
