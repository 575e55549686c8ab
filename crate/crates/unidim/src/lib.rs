//! Simulation and estimation toolkit for unimodular discrete spaces.
//!
//! The crate builds finite windows of random rooted discrete metric spaces
//! (lattices, trees, random-walk sets, self-similar sets), constructs
//! equivariant coverings on them, estimates covering intensities and ball
//! growth, and turns decay-rate regressions into Minkowski/Hausdorff
//! dimension estimates with confidence intervals.

pub mod config;
pub mod cover;
pub mod dim;
pub mod error;
pub mod gen;
pub mod kappa;
pub mod sampling;
pub mod space;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};
pub use space::{Ball, MetricBackend, Norm, PointId, RootedSample, Window};
