//! Analysis of real hypersurface germs with an isolated singularity.
//!
//! The crate walks from a defining polynomial to its Newton diagram, builds
//! a Puiseux-type parametrization of each sector by a Newton scheme, derives
//! the induced metric and its model Laplacian, and checks power-log heat
//! trace expansions numerically.

pub mod error;
pub mod rational;
pub mod poly;
pub mod newton;
pub mod puiseux;
pub mod cone;
pub mod metric;
pub mod spectral;

pub use error::{Error, Result};
pub use poly::{ExponentVector, FloatPoly, Polynomial};
pub use rational::{BigRational, Q};
