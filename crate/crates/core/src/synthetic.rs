//! Seeded samples from manifolds of known dimension.
//!
//! Points are drawn in the manifold's native coordinates and mapped into the
//! ambient space through a random `d × p` matrix with orthonormal columns,
//! which is the same as zero-padding to `d` coordinates and applying a random
//! rotation. When `d` equals the native dimension the points are returned
//! unrotated.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::knn::DataMatrix;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    /// Uniform on `[0, 1]^m`.
    Cube,
    /// Uniform on the unit `m`-sphere in `R^{m+1}`.
    Sphere,
    /// Standard normal in `R^m`.
    Gaussian,
    /// `(t cos t, h, t sin t)`, `t ~ U[1.5π, 4.5π]`, `h ~ U[0, 10]`; `m = 2`.
    SwissRoll,
}

impl ManifoldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ManifoldKind::Cube => "cube",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Gaussian => "gaussian",
            ManifoldKind::SwissRoll => "swiss_roll",
        }
    }

    /// Coordinates needed before embedding.
    pub fn native_dim(&self, intrinsic_dim: usize) -> usize {
        match self {
            ManifoldKind::Cube | ManifoldKind::Gaussian => intrinsic_dim,
            ManifoldKind::Sphere => intrinsic_dim + 1,
            ManifoldKind::SwissRoll => 3,
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cube" => Ok(ManifoldKind::Cube),
            "sphere" => Ok(ManifoldKind::Sphere),
            "gaussian" => Ok(ManifoldKind::Gaussian),
            "swiss_roll" | "swiss-roll" => Ok(ManifoldKind::SwissRoll),
            other => Err(Error::SpecInvalid(format!(
                "unknown manifold kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub n_points: usize,
    pub seed: u64,
}

impl ManifoldSpec {
    pub fn new(
        kind: ManifoldKind,
        intrinsic_dim: usize,
        ambient_dim: usize,
        n_points: usize,
        seed: u64,
    ) -> Self {
        ManifoldSpec {
            kind,
            intrinsic_dim,
            ambient_dim,
            n_points,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::SpecInvalid("n_points must be at least 1".into()));
        }
        if self.intrinsic_dim == 0 {
            return Err(Error::SpecInvalid(
                "intrinsic dimension must be at least 1".into(),
            ));
        }
        if self.kind == ManifoldKind::SwissRoll && self.intrinsic_dim != 2 {
            return Err(Error::SpecInvalid(format!(
                "swiss_roll has intrinsic dimension 2, got m = {}",
                self.intrinsic_dim
            )));
        }
        let native = self.kind.native_dim(self.intrinsic_dim);
        if self.ambient_dim < native {
            return Err(Error::SpecInvalid(format!(
                "{} with m = {} needs ambient dimension >= {native}, got {}",
                self.kind, self.intrinsic_dim, self.ambient_dim
            )));
        }
        Ok(())
    }
}

/// Draws `spec.n_points` samples; identical specs give identical matrices.
pub fn generate<T: Scalar>(spec: &ManifoldSpec) -> Result<DataMatrix<T>> {
    spec.validate()?;
    let native = spec.kind.native_dim(spec.intrinsic_dim);
    let d = spec.ambient_dim;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.n_points * native);
    for _ in 0..spec.n_points {
        sample_native(spec.kind, native, &mut rng, &mut points);
    }

    if d == native {
        let values = points.into_iter().map(T::from_f64_lossy).collect();
        return DataMatrix::new(spec.n_points, d, values);
    }

    // Separate stream so the frame does not shift with n_points.
    let mut frame_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    frame_rng.set_stream(1);
    let frame = orthonormal_frame(d, native, &mut frame_rng);

    let mut values = Vec::with_capacity(spec.n_points * d);
    let mut out = vec![0.0f64; d];
    for y in points.chunks_exact(native) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (c, &yc) in y.iter().enumerate() {
            let col = &frame[c * d..(c + 1) * d];
            for (o, &q) in out.iter_mut().zip(col) {
                *o += q * yc;
            }
        }
        values.extend(out.iter().map(|&v| T::from_f64_lossy(v)));
    }
    DataMatrix::new(spec.n_points, d, values)
}

fn sample_native(kind: ManifoldKind, native: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
    match kind {
        ManifoldKind::Cube => out.extend((0..native).map(|_| rng.random::<f64>())),
        ManifoldKind::Gaussian => {
            out.extend((0..native).map(|_| rng.sample::<f64, _>(StandardNormal)))
        }
        ManifoldKind::Sphere => loop {
            let g: Vec<f64> = (0..native).map(|_| rng.sample(StandardNormal)).collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                out.extend(g.iter().map(|v| v / norm));
                break;
            }
        },
        ManifoldKind::SwissRoll => {
            let t = rng.random_range(1.5 * PI..4.5 * PI);
            let h = rng.random_range(0.0..10.0);
            out.extend([t * t.cos(), h, t * t.sin()]);
        }
    }
}

/// `cols` orthonormal vectors in `R^dim`, stored column after column.
///
/// Modified Gram-Schmidt on Gaussian columns, run twice per column so the
/// result is orthonormal to working precision.
fn orthonormal_frame(dim: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut q = vec![0.0f64; dim * cols];
    let mut c = 0;
    while c < cols {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let start_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..2 {
            for p in 0..c {
                let prev = &q[p * dim..(p + 1) * dim];
                let proj: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(x, a)| *x -= proj * a);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Redraw on (practically impossible) near-dependence.
        if norm <= 1e-8 * start_norm {
            continue;
        }
        q[c * dim..(c + 1) * dim]
            .iter_mut()
            .zip(&v)
            .for_each(|(dst, x)| *dst = x / norm);
        c += 1;
    }
    q
}
