//! Perspective shape from shading with Cartesian depth.
//!
//! The image formation model is a Lambertian surface lit by a point light at
//! the optical centre with inverse-square falloff. Depth is recovered by
//! explicit minimisation of a variational energy that combines an upwind
//! data term with a second-order (Hessian) smoothness term, embedded in a
//! coarse-to-fine pyramid.

pub mod energy;
pub mod error;
pub mod field;
pub mod forward_model;
pub mod geometry;
pub mod metrics;
pub mod solver;
pub mod upwind;

pub use energy::{EnergySettings, PenaliserKind};
pub use error::{Error, Result};
pub use field::{CameraIntrinsics, ScalarField};
pub use forward_model::SceneSpec;
pub use solver::{InitialGuess, ReconstructionResult, Scheme, SolverConfig};
