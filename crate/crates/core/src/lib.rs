//! Homogeneous Finsler geometry over Lie algebra data.
//!
//! The crate evaluates flag curvature of homogeneous Finsler spaces
//! `G/H` through a U-map formula valid for commuting flags, checks the
//! geodesic-orbit and constant-length Killing field conditions, provides a
//! classical Levi-Civita curvature oracle for invariant Riemannian metrics,
//! and decides whether a solvable Lie group admits a negatively curved
//! left-invariant Finsler metric.

pub mod cli;
pub mod curvature;
pub mod decomposition;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod minkowski;
pub mod models;
pub mod rigidity;
pub mod sampling;
pub mod space;

pub use decomposition::ReductiveDecomposition;
pub use error::{Error, Result};
pub use lie::{LieAlgebraModel, SpectrumResult};
pub use minkowski::{MinkowskiNorm, NormFamily, QuarticForm};
