//! Image manifolds of 3D objects: construction, embedding, and shape comparison.
//!
//! The crate builds grayscale image sets of meshes over structured pose or
//! illumination grids, embeds the resulting distance matrices into
//! low-dimensional latent spaces with distance-preserving multidimensional
//! scaling (plus Isomap / Laplacian Eigenmaps / LLE baselines), and compares
//! the latent manifolds with a Kendall-style shape distance that is invariant
//! to rigid motion, global scale, and rigid re-parameterization of the grid.
//!
//! All core math is generic over the scalar type through [`Scalar`];
//! concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign, NumCast};

pub mod embed;
pub mod error;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod render;
pub mod sampling;
pub mod shape;
pub mod simdata;

pub use error::Error;

/// Floating-point scalar the numeric kernels are generic over.
pub trait Scalar:
    Float + FloatConst + NumAssign + NumCast + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or intermediate.
    fn of(x: f64) -> Self {
        NumCast::from(x).expect("f64 -> Scalar conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar -> f64 conversion")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + NumCast + Sum + Debug + Display + Send + Sync + 'static
{
}

pub type Mat64 = linalg::Mat<f64>;
pub type Grid64 = sampling::SampleGrid<f64>;
pub type Mesh64 = render::TriMesh<f64>;
pub type Image64 = render::GrayImage<f64>;
pub type Distances64 = embed::DistanceMatrix<f64>;
pub type Latent64 = embed::LatentManifold<f64>;
pub type ShapeResult64 = shape::ShapeResult<f64>;
