//! Synthetic information-cascade generation and dataset-origin
//! classification.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to [`Real`]. Cascade timestamps are exact decimals.

pub mod cascade;
pub mod classifiers;
pub mod contrastive;
pub mod diffusion;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod model_io;
pub mod netgen;
pub mod nn;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default floating-point type.
pub type Real = f64;

pub type Graph = cascade::CascadeGraph<Real>;
pub type Features = features::FeatureVector<Real>;
pub type NodeFeatures = features::NodeFeatureMatrix<Real>;
pub type Forest = classifiers::ForestModel<Real>;
pub type Gbt = classifiers::GbtModel<Real>;
pub type Gcn = classifiers::GcnModel<Real>;
pub type Input = classifiers::GraphInput<Real>;

pub type Graph32 = cascade::CascadeGraph<f32>;
pub type Features32 = features::FeatureVector<f32>;
