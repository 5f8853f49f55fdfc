use manifold_id::analysis::{Domain, ExperimentRecord};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [u64; 4] = [500, 1000, 1500, 2000];

pub fn random_records(n: usize, seed: u64) -> Vec<ExperimentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let id: f64 = rng.random_range(5.0..50.0);
            let n_train = SIZES[i % SIZES.len()];
            let ga = (0.95 - 0.006 * id
                + 0.02 * (n_train as f64).ln() / 8.0
                + rng.random_range(-0.05..0.05))
            .clamp(0.0, 1.0);
            ExperimentRecord {
                dataset: format!("ds{i}"),
                domain: Domain::Radiological,
                intrinsic_dim: id,
                generalization_ability: ga,
                n_train,
                model: "m".into(),
            }
        })
        .collect()
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap()
}

/// Solves the OLS normal equations in exact rational arithmetic. Column 0 is
/// the intercept.
pub fn rational_ols(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut x: Vec<Vec<BigRational>> = vec![vec![BigRational::from_integer(BigInt::from(1)); n]];
    x.extend(
        columns
            .iter()
            .map(|c| c.iter().map(|&v| exact(v)).collect()),
    );
    let y: Vec<BigRational> = y.iter().map(|&v| exact(v)).collect();
    let p = x.len();
    let mut a = vec![vec![BigRational::zero(); p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = (0..n).map(|r| &x[i][r] * &x[j][r]).sum();
        }
        a[i][p] = (0..n).map(|r| &x[i][r] * &y[r]).sum();
    }
    for c in 0..p {
        let pivot = (c..p)
            .find(|&r| !a[r][c].is_zero())
            .expect("singular design");
        a.swap(c, pivot);
        for r in 0..p {
            if r != c && !a[r][c].is_zero() {
                let f = &a[r][c] / &a[c][c];
                let pivot_row = a[c].clone();
                for (x, y) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                    *x -= &f * y;
                }
            }
        }
    }
    (0..p)
        .map(|i| (&a[i][p] / &a[i][i]).to_f64().unwrap())
        .collect()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * b.abs().max(1.0)
}
