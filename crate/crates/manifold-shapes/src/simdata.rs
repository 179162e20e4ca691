//! Synthetic manifolds with known ground truth: the double saddle curve, the
//! loop of double saddles surface, their isometric lift to high dimension,
//! and Gaussian corruption.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{qr_orthogonal, Mat};
use crate::sampling::{sample_so2, sample_t2, SampleGrid};
use crate::Scalar;

/// Additive `delta * cos(psi)` term separating the two loops of the double
/// saddle's third axis. Small enough that the first three axes stay dominant.
pub const LOOP_SEPARATION: f64 = 0.15;

/// Point set tied to the parameter grid it was sampled on.
#[derive(Clone, Debug)]
pub struct ParamPointSet<T> {
    pub points: Mat<T>,
    pub grid: SampleGrid<T>,
}

impl<T: Scalar> ParamPointSet<T> {
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

/// Closed curve in R^4 winding twice around a circle in its first two axes:
/// `(cos 2psi, sin 2psi, cos 4psi + delta cos psi, cos(psi)/4)`.
pub fn double_saddle<T: Scalar>(n: usize) -> Result<ParamPointSet<T>> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "double saddle needs n >= 8, got {n}"
        )));
    }
    let grid = sample_so2::<T>(n)?;
    let delta = T::of(LOOP_SEPARATION);
    let quarter = T::of(0.25);
    let rows: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let psi = T::of(2.0) * T::PI() * T::of(i as f64) / T::of(n as f64);
            let two = T::of(2.0) * psi;
            let four = T::of(4.0) * psi;
            vec![
                two.cos(),
                two.sin(),
                four.cos() + delta * psi.cos(),
                quarter * psi.cos(),
            ]
        })
        .collect();
    Ok(ParamPointSet {
        points: Mat::from_rows(&rows),
        grid,
    })
}

/// Torus surface in R^6: the first three double-saddle axes rotated about
/// the third axis by `phi`, plus `(cos(psi)/4, cos(phi)/4, sin(phi)/4)`.
pub fn loop_of_double_saddles<T: Scalar>(n_phi: usize, n_psi: usize) -> Result<ParamPointSet<T>> {
    if n_phi < 8 || n_psi < 8 {
        return Err(Error::InvalidArgument(format!(
            "loop of double saddles needs counts >= 8, got ({n_phi}, {n_psi})"
        )));
    }
    let grid = sample_t2::<T>(n_phi, n_psi)?;
    let delta = T::of(LOOP_SEPARATION);
    let quarter = T::of(0.25);
    let two_pi = T::of(2.0) * T::PI();

    let mut rows = Vec::with_capacity(n_phi * n_psi);
    for a in 0..n_phi {
        let phi = two_pi * T::of(a as f64) / T::of(n_phi as f64);
        let (sp, cp) = phi.sin_cos();
        for b in 0..n_psi {
            let psi = two_pi * T::of(b as f64) / T::of(n_psi as f64);
            let x1 = (T::of(2.0) * psi).cos();
            let x2 = (T::of(2.0) * psi).sin();
            let x3 = (T::of(4.0) * psi).cos() + delta * psi.cos();
            rows.push(vec![
                cp * x1 - sp * x2,
                sp * x1 + cp * x2,
                x3,
                quarter * psi.cos(),
                quarter * cp,
                quarter * sp,
            ]);
        }
    }
    Ok(ParamPointSet {
        points: Mat::from_rows(&rows),
        grid,
    })
}

/// Zero-pad to `target_dim` and apply a seeded random orthogonal matrix
/// (QR of a Gaussian matrix with positive diagonal). Exact isometry of the
/// point set up to rounding.
pub fn lift_and_rotate<T: Scalar>(
    p: &ParamPointSet<T>,
    target_dim: usize,
    seed: u64,
) -> Result<ParamPointSet<T>> {
    let m = p.dim();
    if target_dim < m {
        return Err(Error::Dimension(format!(
            "target dimension {target_dim} below source dimension {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = Mat::zeros(target_dim, target_dim);
    for i in 0..target_dim {
        for j in 0..target_dim {
            gauss[(i, j)] = T::of(rng.sample::<f64, _>(StandardNormal));
        }
    }
    let q = qr_orthogonal(&gauss);

    let n = p.len();
    let mut out = Mat::zeros(n, target_dim);
    for i in 0..n {
        let src = p.points.row(i);
        let dst = out.row_mut(i);
        // (padded row) * Q: only the first m entries are nonzero
        for (k, &x) in src.iter().enumerate().take(m) {
            for j in 0..target_dim {
                dst[j] += x * q[(k, j)];
            }
        }
    }
    Ok(ParamPointSet {
        points: out,
        grid: p.grid.clone(),
    })
}

/// Add seeded i.i.d. Gaussian noise of standard deviation `sigma` to every
/// coordinate.
pub fn add_noise<T: Scalar>(p: &ParamPointSet<T>, sigma: T, seed: u64) -> ParamPointSet<T> {
    assert!(sigma >= T::zero(), "sigma must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = p.points.clone();
    for i in 0..points.rows() {
        for v in points.row_mut(i) {
            *v += sigma * T::of(rng.sample::<f64, _>(StandardNormal));
        }
    }
    ParamPointSet {
        points,
        grid: p.grid.clone(),
    }
}
