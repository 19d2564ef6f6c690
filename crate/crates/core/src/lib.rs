//! Steady Navier-slip flow in distorted two-dimensional strips.
//!
//! The crate builds boundary-fitted geometry and meshes, closed-form Poiseuille end
//! profiles, a divergence-free flux carrier, Taylor-Hood discretizations with Poincare and
//! Korn constant estimators, a Newton-Picard solver and post-processing of the decay toward
//! the end profiles.

pub mod carrier;
pub mod decay;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod linalg;
pub mod poiseuille;
pub mod quadrature;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use poiseuille::{Friction, PoiseuilleProfile, Side};

/// Double-precision Poiseuille profile.
pub type Profile = PoiseuilleProfile<f64>;
/// Exact rational Poiseuille profile.
pub type ExactProfile = PoiseuilleProfile<num_rational::BigRational>;
