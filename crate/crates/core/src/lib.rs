//! Kinematics of surfaces with a focus on minimal surfaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`rotations`]: Rodrigues vector algebra on SO(3) and the unique
//!   drilling/bending split of a rotation about a given axis.
//! - [`grid`] and [`surfcalc`]: sampled parametric patches and the surface
//!   differential operators (gradient, shape operator, Laplacian, curl,
//!   circulation, connector) evaluated by finite differences.
//! - [`weierstrass`]: minimal surfaces generated from holomorphic data
//!   `F = exp(Φ + iχ)` together with their closed-form metric, normal and
//!   curvature.
//! - [`bendneutral`]: deformation gradients between minimal surfaces with a
//!   common spherical image, bending/drilling contents and the integrability
//!   and compatibility checkers.
//! - [`families`]: Bonnet, catenoid-helicoid, Bour and generalized associate
//!   families.
//! - [`mesh`] and [`verify`]: OBJ/PLY export and the verification suite used
//!   by the command-line tool.

pub mod bendneutral;
pub mod error;
pub mod expr;
pub mod families;
pub mod grid;
pub mod mesh;
pub mod rotations;
pub mod surfcalc;
pub mod verify;
pub mod weierstrass;

pub use error::{Error, Result};

/// Three-vector used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used throughout the crate.
pub type Mat3 = nalgebra::Matrix3<f64>;
