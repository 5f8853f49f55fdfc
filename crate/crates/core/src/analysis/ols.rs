//! Ordinary least squares with an intercept.
//!
//! Both entry points solve the normal equations in centered form: the
//! intercept is eliminated by subtracting column means, and the remaining
//! `p × p` system is scaled to unit diagonal before a Cholesky solve so that
//! rank deficiency shows up as a vanishing pivot.

use serde::Serialize;

use crate::{Error, Result, Scalar};

/// Pivots of the unit-diagonal Gram matrix below this mean the predictors
/// are collinear to working precision.
const COLLINEARITY_PIVOT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit<T> {
    pub intercept: T,
    /// One slope per predictor, in input order.
    pub slopes: Vec<T>,
    /// Coefficient of determination, `1 − SS_res / SS_tot`, in `[0, 1]`.
    pub r_squared: T,
    pub residuals: Vec<T>,
    /// Set when the response has no variance; `r_squared` is then 0.
    pub degenerate_response: bool,
}

impl<T: Scalar> LinearFit<T> {
    pub fn predict(&self, x: &[T]) -> T {
        self.slopes
            .iter()
            .zip(x)
            .fold(self.intercept, |acc, (&b, &v)| acc + b * v)
    }
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len())
}

/// `SS ≤ n (8 ε max|v|)²` is indistinguishable from a constant column.
fn is_constant<T: Scalar>(ss: T, v: &[T]) -> bool {
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let floor = T::from_f64_lossy(8.0) * T::epsilon() * scale;
    ss <= T::from_usize_lossy(v.len()) * floor * floor
}

fn finish<T: Scalar>(intercept: T, slopes: Vec<T>, predictors: &[&[T]], y: &[T]) -> LinearFit<T> {
    let residuals: Vec<T> = (0..y.len())
        .map(|i| {
            let fitted = slopes
                .iter()
                .zip(predictors)
                .fold(intercept, |acc, (&b, col)| acc + b * col[i]);
            y[i] - fitted
        })
        .collect();
    let y_bar = mean(y);
    let ss_tot: T = y.iter().map(|&v| (v - y_bar) * (v - y_bar)).sum();
    let ss_res: T = residuals.iter().map(|&r| r * r).sum();
    let degenerate_response = is_constant(ss_tot, y);
    let r_squared = if degenerate_response {
        T::zero()
    } else {
        (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one())
    };
    LinearFit {
        intercept,
        slopes,
        r_squared,
        residuals,
        degenerate_response,
    }
}

/// `y = intercept + slope · x`.
pub fn simple<T: Scalar>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::DegenerateDesign(
            "all predictor values are equal".into(),
        ));
    }
    let x_bar = mean(x);
    let y_bar = mean(y);
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx = sxx + (xi - x_bar) * (xi - x_bar);
        sxy = sxy + (xi - x_bar) * (yi - y_bar);
    }
    if sxx <= T::zero() {
        return Err(Error::DegenerateDesign("predictor has no variance".into()));
    }
    let slope = sxy / sxx;
    Ok(finish(y_bar - slope * x_bar, vec![slope], &[x], y))
}

/// `y = intercept + Σ_j slope_j · predictors[j]`.
pub fn multiple<T: Scalar>(predictors: &[&[T]], y: &[T]) -> Result<LinearFit<T>> {
    let n = y.len();
    let p = predictors.len();
    assert!(predictors.iter().all(|c| c.len() == n));
    if n < p + 1 {
        return Err(Error::TooFewRecords {
            needed: p + 1,
            got: n,
        });
    }

    let means: Vec<T> = predictors.iter().map(|c| mean(c)).collect();
    let y_bar = mean(y);
    let centered: Vec<Vec<T>> = predictors
        .iter()
        .zip(&means)
        .map(|(c, &m)| c.iter().map(|&v| v - m).collect())
        .collect();

    let mut gram = vec![T::zero(); p * p];
    let mut rhs = vec![T::zero(); p];
    for a in 0..p {
        for b in 0..=a {
            let s: T = centered[a]
                .iter()
                .zip(&centered[b])
                .map(|(&u, &v)| u * v)
                .sum();
            gram[a * p + b] = s;
            gram[b * p + a] = s;
        }
        rhs[a] = centered[a]
            .iter()
            .zip(y)
            .map(|(&u, &v)| u * (v - y_bar))
            .sum();
    }

    let mut scale = vec![T::zero(); p];
    for j in 0..p {
        if is_constant(gram[j * p + j], predictors[j]) {
            return Err(Error::DegenerateDesign(format!(
                "predictor {j} is constant and collinear with the intercept"
            )));
        }
        scale[j] = gram[j * p + j].sqrt();
    }
    for a in 0..p {
        for b in 0..p {
            gram[a * p + b] = gram[a * p + b] / (scale[a] * scale[b]);
        }
        rhs[a] = rhs[a] / scale[a];
    }

    let z = cholesky_solve(&mut gram, &rhs, p)?;
    let slopes: Vec<T> = z.iter().zip(&scale).map(|(&zj, &s)| zj / s).collect();
    let intercept = slopes
        .iter()
        .zip(&means)
        .fold(y_bar, |acc, (&b, &m)| acc - b * m);
    Ok(finish(intercept, slopes, predictors, y))
}

/// Solves `A z = b` for symmetric positive definite `A` (overwritten).
fn cholesky_solve<T: Scalar>(a: &mut [T], b: &[T], p: usize) -> Result<Vec<T>> {
    let tol = T::from_f64_lossy(COLLINEARITY_PIVOT);
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d = d - a[j * p + k] * a[j * p + k];
        }
        if d <= tol {
            return Err(Error::DegenerateDesign(format!(
                "predictors are collinear (pivot {} at column {j})",
                d.to_f64_exact()
            )));
        }
        let l = d.sqrt();
        a[j * p + j] = l;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s = s - a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / l;
        }
    }
    let mut y = vec![T::zero(); p];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s = s - a[i * p + k] * y[k];
        }
        y[i] = s / a[i * p + i];
    }
    let mut z = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = y[i];
        for k in (i + 1)..p {
            s = s - a[k * p + i] * z[k];
        }
        z[i] = s / a[i * p + i];
    }
    Ok(z)
}
