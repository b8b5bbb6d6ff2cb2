//! Persistent homology of point clouds, distances between persistence
//! diagrams, kernels on diagrams and kernel learning with diagram covariates.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`.

pub mod error;
pub mod filtration;
pub mod io;
pub mod kernels;
pub mod learning;
pub mod metrics;
pub mod persistence;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Cloud = filtration::PointCloud<f64>;
pub type Distances = filtration::DistanceMatrix<f64>;
pub type Rips = filtration::Filtration<f64>;
pub type Point = persistence::DiagramPoint<f64>;
pub type Diagram = persistence::PersistenceDiagram<f64>;
pub type Diagrams = persistence::DiagramSet<f64>;
pub type Kernel = kernels::KernelSpec<f64>;
pub type Gram = kernels::KernelMatrix<f64>;
