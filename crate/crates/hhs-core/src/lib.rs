//! Finite models of hierarchically hyperbolic structures.
//!
//! The metric layers ([`metrics`], [`horocusp`]) are generic over a
//! [`Scalar`]; the structural layers work with `f64` through the aliases
//! below.

pub mod boundary;
pub mod enumerate;
pub mod classify;
pub mod cli_io;
pub mod fixtures;
pub mod horocusp;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod signature;
pub mod transforms;

pub use scalar::Scalar;

pub type Graph = metrics::WeightedGraph<f64>;
pub type Distances = metrics::DistanceMatrix<f64>;
