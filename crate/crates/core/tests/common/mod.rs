#![allow(dead_code)]

pub mod regression;

use manifold_id::knn::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix::new(
        n,
        d,
        (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

/// Dense random orthogonal `d × d` matrix (row-major), Householder-free
/// Gram-Schmidt on Gaussian rows.
pub fn random_orthogonal(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for u in &q {
                let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, a)| *x -= p * a);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            q.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    q.concat()
}

/// Applies `x ↦ Q x + shift` to every row.
pub fn rigid_motion(data: &DataMatrix<f64>, seed: u64) -> DataMatrix<f64> {
    let d = data.n_dims();
    let q = random_orthogonal(d, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
    let mut out = Vec::with_capacity(data.values().len());
    for x in data.rows() {
        for r in 0..d {
            let row = &q[r * d..(r + 1) * d];
            out.push(row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + shift[r]);
        }
    }
    DataMatrix::new(data.n_points(), d, out).unwrap()
}

pub fn scaled(data: &DataMatrix<f64>, c: f64) -> DataMatrix<f64> {
    DataMatrix::new(
        data.n_points(),
        data.n_dims(),
        data.values().iter().map(|v| v * c).collect(),
    )
    .unwrap()
}

/// Appends `extra` coordinates that hold the same constant for every point.
pub fn padded(data: &DataMatrix<f64>, extra: usize, value: f64) -> DataMatrix<f64> {
    let rows: Vec<Vec<f64>> = data
        .rows()
        .map(|r| {
            r.iter()
                .copied()
                .chain(std::iter::repeat_n(value, extra))
                .collect()
        })
        .collect();
    DataMatrix::from_rows(&rows).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}
