//! Feature-rich network modeling: a bilinear latent-matrix link model,
//! estimators for recovering the matrix from an observed graph, synthetic
//! graph generation and cross-validated link-prediction evaluation.

pub mod error;
pub mod estimators;
pub mod eval;
pub mod features;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod synthgen;

pub use error::{Error, Result};
pub use features::{FeatureAssignment, WeightedAssignment};
pub use graph::FeatureGraph;
pub use matrix::InteractionMatrix;
pub use model::{activate, link_probability, score, ActivationSpec};
